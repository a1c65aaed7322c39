// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "io_util.hpp"
#include "panopose/error.hpp"

namespace panopose {

namespace {

using nlohmann::json;

class Context {
 public:
  explicit Context(std::string where) : where_(std::move(where)) {}

  [[noreturn]] void fail(Errc code, const std::string& what) const {
    throw Error(code, where_.empty() ? what : where_ + ": " + what);
  }

  double number(const json& j, const char* field) const {
    if (!j.is_number()) fail(Errc::parse, std::string(field) + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(Errc::validation, std::string(field) + " is not finite");
    return v;
  }

 private:
  std::string where_;
};

std::string person_where(const std::string& frame_id, std::size_t index) {
  return "frame '" + frame_id + "' person " + std::to_string(index);
}

Person parse_person(const json& j, const Context& ctx, const KeypointSchema& schema, FileKind kind) {
  if (!j.is_object()) ctx.fail(Errc::parse, "person must be an object");
  Person p;
  if (auto it = j.find("id"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      p.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      p.id = std::to_string(it->get<std::int64_t>());
    } else {
      ctx.fail(Errc::parse, "id must be a string or an integer");
    }
  }
  if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
    const double s = ctx.number(*it, "score");
    if (s < 0.0 || s > 1.0) ctx.fail(Errc::validation, "score outside [0, 1]");
    p.score = s;
  }
  if (auto it = j.find("box"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 4) ctx.fail(Errc::parse, "box must be [x1, y1, x2, y2]");
    BoundingBox b{ctx.number((*it)[0], "box"), ctx.number((*it)[1], "box"),
                  ctx.number((*it)[2], "box"), ctx.number((*it)[3], "box"), p.score.value_or(1.0)};
    if (!(b.x1 < b.x2 && b.y1 < b.y2)) ctx.fail(Errc::validation, "box needs x1 < x2 and y1 < y2");
    p.box = b;
  }
  if (auto it = j.find("pose"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) ctx.fail(Errc::parse, "pose must be an array of [x, y, v]");
    if (it->size() != schema.size())
      ctx.fail(Errc::validation, "pose has " + std::to_string(it->size()) + " keypoints, schema '" +
                                     schema.id() + "' has " + std::to_string(schema.size()));
    Pose pose;
    for (const auto& kp : *it) {
      if (!kp.is_array() || kp.size() != 3) ctx.fail(Errc::parse, "keypoint must be [x, y, v]");
      const double x = ctx.number(kp[0], "keypoint x");
      const double y = ctx.number(kp[1], "keypoint y");
      if (!kp[2].is_number_integer()) ctx.fail(Errc::parse, "visibility must be 0, 1 or 2");
      const auto v = kp[2].get<std::int64_t>();
      if (v < 0 || v > 2) ctx.fail(Errc::validation, "visibility must be 0, 1 or 2");
      pose.keypoints.push_back({x, y, static_cast<Visibility>(v)});
    }
    p.pose = std::move(pose);
  }
  if (!p.box && !p.pose) ctx.fail(Errc::validation, "person needs a box or a pose");
  if (kind == FileKind::predictions && !p.score) ctx.fail(Errc::validation, "prediction without score");
  return p;
}

void write_string(std::string& out, const std::string& s) { out += json(s).dump(); }

void write_number(std::string& out, double v) { out += detail::format_double(v); }

}  // namespace

Dataset parse_dataset(std::string_view text, const KeypointSchema& schema, FileKind kind) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, e.what());
  }
  const Context top("");
  if (!doc.is_object()) top.fail(Errc::parse, "top level must be an object");

  Dataset ds;
  const auto schema_it = doc.find("schema");
  if (schema_it == doc.end() || !schema_it->is_string()) top.fail(Errc::parse, "missing 'schema'");
  ds.schema = schema_it->get<std::string>();
  if (ds.schema != schema.id())
    top.fail(Errc::validation, "schema mismatch: file uses '" + ds.schema + "', expected '" +
                                   schema.id() + "'");

  const auto pano_it = doc.find("pano");
  if (pano_it == doc.end() || !pano_it->is_object()) top.fail(Errc::parse, "missing 'pano'");
  for (const char* key : {"width", "height"}) {
    const auto it = pano_it->find(key);
    if (it == pano_it->end() || !it->is_number_integer())
      top.fail(Errc::parse, std::string("pano.") + key + " must be an integer");
    if (it->get<std::int64_t>() <= 0)
      top.fail(Errc::validation, std::string("pano.") + key + " must be positive");
  }
  ds.pano = {(*pano_it)["width"].get<std::int64_t>(), (*pano_it)["height"].get<std::int64_t>()};

  if (auto it = doc.find("meta"); it != doc.end()) {
    if (!it->is_object()) top.fail(Errc::parse, "'meta' must be an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string()) top.fail(Errc::parse, "meta values must be strings");
      ds.meta[k] = v.get<std::string>();
    }
  }

  const auto frames_it = doc.find("frames");
  if (frames_it == doc.end() || !frames_it->is_array()) top.fail(Errc::parse, "missing 'frames'");
  std::set<std::string> seen;
  for (std::size_t f = 0; f < frames_it->size(); ++f) {
    const auto& jf = (*frames_it)[f];
    const Context fctx("frame " + std::to_string(f));
    if (!jf.is_object()) fctx.fail(Errc::parse, "frame must be an object");
    const auto id_it = jf.find("frame_id");
    if (id_it == jf.end() || !id_it->is_string()) fctx.fail(Errc::parse, "missing 'frame_id'");
    FrameAnnotations frame{id_it->get<std::string>(), {}};
    if (!seen.insert(frame.frame_id).second)
      top.fail(Errc::validation, "duplicate frame id '" + frame.frame_id + "'");
    const auto persons_it = jf.find("persons");
    if (persons_it == jf.end() || !persons_it->is_array())
      fctx.fail(Errc::parse, "frame '" + frame.frame_id + "' is missing 'persons'");
    for (std::size_t i = 0; i < persons_it->size(); ++i) {
      const Context pctx(person_where(frame.frame_id, i));
      frame.persons.push_back(parse_person((*persons_it)[i], pctx, schema, kind));
    }
    ds.frames.push_back(std::move(frame));
  }
  return ds;
}

Dataset load_ground_truth(const std::filesystem::path& path, const KeypointSchema& schema) {
  return parse_dataset(detail::read_file(path), schema, FileKind::ground_truth);
}

Dataset load_predictions(const std::filesystem::path& path, const KeypointSchema& schema) {
  return parse_dataset(detail::read_file(path), schema, FileKind::predictions);
}

std::string dataset_to_string(const Dataset& ds) {
  std::vector<const FrameAnnotations*> frames;
  for (const auto& f : ds.frames) frames.push_back(&f);
  std::sort(frames.begin(), frames.end(),
            [](const auto* a, const auto* b) { return a->frame_id < b->frame_id; });
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i]->frame_id == frames[i - 1]->frame_id)
      throw Error(Errc::validation, "duplicate frame id '" + frames[i]->frame_id + "'");

  std::string out = "{\n  \"schema\": ";
  write_string(out, ds.schema);
  out += ",\n  \"pano\": {\"width\": " + std::to_string(ds.pano.width) +
         ", \"height\": " + std::to_string(ds.pano.height) + "},\n";
  if (!ds.meta.empty()) {
    out += "  \"meta\": {";
    bool first = true;
    for (const auto& [k, v] : ds.meta) {
      out += first ? "" : ", ";
      first = false;
      write_string(out, k);
      out += ": ";
      write_string(out, v);
    }
    out += "},\n";
  }
  out += "  \"frames\": [";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& frame = *frames[f];
    out += f ? ",\n" : "\n";
    out += "    {\"frame_id\": ";
    write_string(out, frame.frame_id);
    out += ", \"persons\": [";
    for (std::size_t i = 0; i < frame.persons.size(); ++i) {
      const auto& p = frame.persons[i];
      out += i ? ",\n      {" : "\n      {";
      bool first = true;
      auto field = [&](const char* name) {
        out += first ? "\"" : ", \"";
        first = false;
        out += name;
        out += "\": ";
      };
      if (p.id) {
        field("id");
        write_string(out, *p.id);
      }
      if (p.box) {
        field("box");
        out += "[";
        write_number(out, p.box->x1);
        out += ", ";
        write_number(out, p.box->y1);
        out += ", ";
        write_number(out, p.box->x2);
        out += ", ";
        write_number(out, p.box->y2);
        out += "]";
      }
      if (p.score) {
        field("score");
        write_number(out, *p.score);
      }
      if (p.pose) {
        field("pose");
        out += "[";
        for (std::size_t k = 0; k < p.pose->keypoints.size(); ++k) {
          const auto& kp = p.pose->keypoints[k];
          out += k ? ", [" : "[";
          write_number(out, kp.x);
          out += ", ";
          write_number(out, kp.y);
          out += ", " + std::to_string(static_cast<int>(kp.visibility)) + "]";
        }
        out += "]";
      }
      out += "}";
    }
    out += frame.persons.empty() ? "]}" : "\n    ]}";
  }
  out += frames.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  detail::write_file(path, dataset_to_string(ds));
}

}  // namespace panopose
