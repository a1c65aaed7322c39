// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/schema.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "io_util.hpp"
#include "panopose/error.hpp"

namespace panopose {

KeypointSchema::KeypointSchema(std::string id, std::vector<std::string> names)
    : id_(std::move(id)), names_(std::move(names)) {
  if (names_.empty()) throw Error(Errc::validation, "schema '" + id_ + "' has no keypoints");
  std::set<std::string_view> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error(Errc::validation, "schema '" + id_ + "' has an empty keypoint name");
    if (!seen.insert(n).second)
      throw Error(Errc::validation, "schema '" + id_ + "' repeats keypoint name '" + n + "'");
  }
}

std::size_t KeypointSchema::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return static_cast<std::size_t>(it - names_.begin());
}

const KeypointSchema& coco17() {
  static const KeypointSchema schema(
      std::string(kCocoSchemaId),
      {"nose", "left eye", "right eye", "left ear", "right ear", "left shoulder",
       "right shoulder", "left elbow", "right elbow", "left wrist", "right wrist",
       "left hip", "right hip", "left knee", "right knee", "left ankle", "right ankle"});
  return schema;
}

namespace {

// Rows of the JRDB counterpart table, 1-based row r at position r-1.
struct TableRow {
  const char* name;
  std::vector<const char*> counterparts;
};

std::vector<TableRow> jrdb_table(bool verbatim) {
  return {
      {"head", {"left eye", "right eye"}},
      {"right eye", {"right eye"}},
      {"left eye", {"left eye"}},
      {"right shoulder", {"right shoulder"}},
      {"neck", {"left shoulder", "right shoulder"}},
      {"left shoulder", {"left shoulder"}},
      {"right elbow", {"right elbow"}},
      {"left elbow", {"left elbow"}},
      {"center hip", {"left hip", "right hip"}},
      verbatim ? TableRow{"left hand (row 10)", {"left wrist"}}
               : TableRow{"right hand", {"right wrist"}},
      {"right hip", {"right hip"}},
      {"left hip", {"left hip"}},
      {"left hand", {"left wrist"}},
      {"right knee", {"right knee"}},
      {"left knee", {"left knee"}},
      {"right foot", {"right ankle"}},
      {"left foot", {"left ankle"}},
  };
}

KeypointSchema make_jrdb(bool verbatim) {
  std::vector<std::string> names;
  for (const auto& row : jrdb_table(verbatim)) names.emplace_back(row.name);
  return KeypointSchema(std::string(verbatim ? kJrdbVerbatimSchemaId : kJrdbSchemaId),
                        std::move(names));
}

}  // namespace

const KeypointSchema& jrdb17(bool verbatim) {
  static const KeypointSchema corrected = make_jrdb(false);
  static const KeypointSchema literal = make_jrdb(true);
  return verbatim ? literal : corrected;
}

const KeypointSchema& schema_by_id(std::string_view id) {
  if (id == kCocoSchemaId) return coco17();
  if (id == kJrdbSchemaId) return jrdb17(false);
  if (id == kJrdbVerbatimSchemaId) return jrdb17(true);
  throw Error(Errc::validation, "unknown schema '" + std::string(id) + "'");
}

SchemaMapping default_mapping(bool verbatim) {
  const auto& src = coco17();
  const auto& dst = jrdb17(verbatim);
  SchemaMapping m{src.id(), dst.id(), src.size(), {}};
  for (const auto& row : jrdb_table(verbatim)) {
    auto& entry = m.entries.emplace_back();
    for (const char* name : row.counterparts) entry.push_back(src.index_of(name));
  }
  return m;
}

SchemaMapping identity_mapping(const KeypointSchema& schema) {
  SchemaMapping m{schema.id(), schema.id(), schema.size(), {}};
  for (std::size_t i = 0; i < schema.size(); ++i) m.entries.push_back({i});
  return m;
}

MappingValidation validate_mapping(const SchemaMapping& mapping, const KeypointSchema& src,
                                   const KeypointSchema& dst) {
  MappingValidation result;
  auto& v = result.violations;
  if (mapping.source_schema != src.id())
    v.push_back("source schema '" + mapping.source_schema + "' does not match '" + src.id() + "'");
  if (mapping.target_schema != dst.id())
    v.push_back("target schema '" + mapping.target_schema + "' does not match '" + dst.id() + "'");
  if (mapping.source_size != src.size())
    v.push_back("source size " + std::to_string(mapping.source_size) + " does not match " +
                std::to_string(src.size()));
  if (mapping.entries.size() != dst.size())
    v.push_back("wrong entry count: " + std::to_string(mapping.entries.size()) + " entries for " +
                std::to_string(dst.size()) + " target keypoints");
  for (std::size_t t = 0; t < mapping.entries.size(); ++t) {
    const auto& entry = mapping.entries[t];
    if (entry.empty()) v.push_back("target " + std::to_string(t) + ": empty counterpart list");
    for (std::size_t s : entry) {
      if (s >= src.size())
        v.push_back("target " + std::to_string(t) + ": index out of range (" + std::to_string(s) +
                    " >= " + std::to_string(src.size()) + ")");
    }
  }
  return result;
}

void require_valid(const SchemaMapping& mapping, const KeypointSchema& src,
                   const KeypointSchema& dst) {
  auto result = validate_mapping(mapping, src, dst);
  if (result.ok()) return;
  std::string msg = "invalid mapping";
  for (const auto& s : result.violations) msg += "; " + s;
  throw Error(Errc::validation, msg);
}

Pose remap_pose(const Pose& pose, const SchemaMapping& mapping) {
  if (pose.size() != mapping.source_size)
    throw Error(Errc::validation, "pose has " + std::to_string(pose.size()) +
                                      " keypoints, mapping expects " +
                                      std::to_string(mapping.source_size));
  Pose out;
  out.score = pose.score;
  out.keypoints.reserve(mapping.entries.size());
  for (const auto& entry : mapping.entries) {
    if (entry.empty()) throw Error(Errc::validation, "empty counterpart list");
    double sx = 0.0, sy = 0.0;
    auto vis = Visibility::labeled_visible;
    for (std::size_t s : entry) {
      if (s >= pose.size()) throw Error(Errc::range, "counterpart index out of range");
      const auto& kp = pose.keypoints[s];
      sx += kp.x;
      sy += kp.y;
      vis = std::min(vis, kp.visibility);
    }
    const auto n = static_cast<double>(entry.size());
    out.keypoints.push_back({sx / n, sy / n, vis});
  }
  return out;
}

SchemaMapping mapping_from_json(std::string_view text, const KeypointSchema& src,
                                const KeypointSchema& dst) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, std::string("mapping: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_object())
    throw Error(Errc::format, "mapping: expected an object with an 'entries' object");

  SchemaMapping m;
  m.source_schema = doc.value("source_schema", src.id());
  m.target_schema = doc.value("target_schema", dst.id());
  m.source_size = src.size();
  m.entries.resize(dst.size());
  std::vector<bool> seen(dst.size(), false);
  for (const auto& [target, sources] : doc["entries"].items()) {
    const auto t = dst.index_of(target);
    if (t == dst.size())
      throw Error(Errc::validation, "mapping: unknown target keypoint '" + target + "'");
    if (!sources.is_array())
      throw Error(Errc::format, "mapping: entry '" + target + "' must be an array of names");
    seen[t] = true;
    for (const auto& s : sources) {
      if (!s.is_string())
        throw Error(Errc::format, "mapping: entry '" + target + "' must contain names");
      const auto idx = src.index_of(s.get<std::string>());
      if (idx == src.size())
        throw Error(Errc::validation,
                    "mapping: unknown source keypoint '" + s.get<std::string>() + "'");
      m.entries[t].push_back(idx);
    }
  }
  for (std::size_t t = 0; t < seen.size(); ++t) {
    if (!seen[t])
      throw Error(Errc::validation, "mapping: no entry for target keypoint '" + dst.names()[t] + "'");
  }
  require_valid(m, src, dst);
  return m;
}

SchemaMapping mapping_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, std::string("mapping: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("source_schema") || !doc.contains("target_schema") ||
      !doc["source_schema"].is_string() || !doc["target_schema"].is_string())
    throw Error(Errc::format, "mapping: 'source_schema' and 'target_schema' are required");
  return mapping_from_json(text, schema_by_id(doc["source_schema"].get<std::string>()),
                           schema_by_id(doc["target_schema"].get<std::string>()));
}

SchemaMapping load_mapping(const std::filesystem::path& path) {
  return mapping_from_json(detail::read_file(path));
}

std::string mapping_to_json(const SchemaMapping& mapping, const KeypointSchema& src,
                            const KeypointSchema& dst) {
  require_valid(mapping, src, dst);
  nlohmann::ordered_json doc;
  doc["source_schema"] = mapping.source_schema;
  doc["target_schema"] = mapping.target_schema;
  auto& entries = doc["entries"] = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < mapping.entries.size(); ++t) {
    auto names = nlohmann::ordered_json::array();
    for (std::size_t s : mapping.entries[t]) names.push_back(src.names()[s]);
    entries[dst.names()[t]] = std::move(names);
  }
  return doc.dump(2) + "\n";
}

}  // namespace panopose
