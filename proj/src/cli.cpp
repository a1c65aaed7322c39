// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "io_util.hpp"
#include "panopose/dataio.hpp"
#include "panopose/decode.hpp"
#include "panopose/error.hpp"
#include "panopose/geometry.hpp"
#include "panopose/metrics.hpp"
#include "panopose/schema.hpp"
#include "panopose/weights.hpp"

namespace panopose::cli {

namespace {

struct SchemaFlags {
  std::string id{kJrdbSchemaId};
  bool verbatim = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--schema", id, "Keypoint schema of the input files")
        ->check(CLI::IsMember({std::string(kJrdbSchemaId), std::string(kCocoSchemaId),
                               std::string(kJrdbVerbatimSchemaId)}))
        ->capture_default_str();
    cmd->add_flag("--verbatim-table1", verbatim,
                  "Use the literal counterpart table (duplicated 'left hand' row)");
  }

  const KeypointSchema& resolve() const {
    if (verbatim && id == kJrdbSchemaId) return jrdb17(true);
    return schema_by_id(id);
  }
};

struct PanoFlags {
  std::optional<std::int64_t> width, height;

  void add(CLI::App* cmd) {
    cmd->add_option("--pano-width", width, "Override the panorama width")->check(CLI::PositiveNumber);
    cmd->add_option("--pano-height", height, "Override the panorama height")->check(CLI::PositiveNumber);
  }

  void apply(Dataset& ds) const {
    if (width) ds.pano.width = *width;
    if (height) ds.pano.height = *height;
  }
};

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Subcommand state lives here so the callbacks below can run after parsing.
struct Options {
  SchemaFlags schema;
  PanoFlags pano;

  std::string src, out, mapping, weight_name;
  std::optional<std::string> bias_name;

  std::string in, gt, pred, detections, heatmaps, report, table, sigmas;
  double margin = kDefaultBoxMargin;
  double nms_iou = kDefaultNmsIou;
  double padding = kDefaultCropPadding;
  double stride = 4.0;
  double oks_threshold = 0.5;
  double ospa_cutoff = 1.0;
  double ospa_order = 1.0;
  unsigned threads = 1;
  std::optional<std::int64_t> shift;
  std::optional<std::uint64_t> seed;
};

int cmd_remap_weights(const Options& o, std::ostream& out) {
  const bool verbatim = o.schema.verbatim;
  const auto mapping = o.mapping.empty() ? default_mapping(verbatim) : load_mapping(o.mapping);
  const auto src = load_tensor_map(o.src);
  auto result = remap_head_weights(src, o.weight_name, o.bias_name, mapping);
  result.metadata["keypoint_mapping"] = mapping.source_schema + "->" + mapping.target_schema;
  save_tensor_map(result, o.out);
  out << "remapped '" << o.weight_name << "'" << (o.bias_name ? " and '" + *o.bias_name + "'" : "")
      << " from " << mapping.source_size << " to " << mapping.target_size() << " keypoints\n";
  return kExitOk;
}

int cmd_export_mapping(const Options& o, std::ostream& out) {
  const auto mapping = default_mapping(o.schema.verbatim);
  const auto text = mapping_to_json(mapping, coco17(), jrdb17(o.schema.verbatim));
  if (o.out.empty()) {
    out << text;
  } else {
    detail::write_file(o.out, text);
  }
  return kExitOk;
}

int cmd_boxes_from_poses(const Options& o, std::ostream& out) {
  auto ds = load_ground_truth(o.in, o.schema.resolve());
  o.pano.apply(ds);
  std::size_t boxed = 0;
  for (auto& frame : ds.frames) {
    for (auto& person : frame.persons) {
      if (!person.pose || !pose_extent(*person.pose)) continue;
      auto box = bbox_from_pose(*person.pose, o.margin, ds.pano);
      box.score = person.score.value_or(1.0);
      person.box = box;
      ++boxed;
    }
  }
  ds.meta["box_margin"] = detail::format_double(o.margin);
  save_dataset(ds, o.out);
  out << "boxes " << boxed << " margin " << detail::format_double(o.margin) << "\n";
  return kExitOk;
}

int cmd_shift(const Options& o, std::ostream& out, std::ostream& err) {
  auto ds = load_ground_truth(o.in, o.schema.resolve());
  o.pano.apply(ds);
  std::int64_t shift = 0;
  if (o.shift) {
    shift = *o.shift;
  } else if (o.seed) {
    std::mt19937_64 rng(*o.seed);
    shift = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(ds.pano.width));
    ds.meta["shift_seed"] = std::to_string(*o.seed);
  } else {
    err << "shift: pass --shift, or --seed for a random shift\n";
    return kExitUsage;
  }
  const auto w = ds.pano.width;
  shift = ((shift % w) + w) % w;
  std::size_t before = 0, after = 0;
  for (const auto& f : ds.frames) before += f.persons.size();
  ds = shift_dataset(ds, shift);
  for (const auto& f : ds.frames) after += f.persons.size();
  ds.meta["shift"] = std::to_string(shift);
  save_dataset(ds, o.out);
  out << "shift " << shift;
  if (o.seed && !o.shift) out << " seed " << *o.seed;
  out << " removed " << (before - after) << "\n";
  return kExitOk;
}

int cmd_nms(const Options& o, std::ostream& out) {
  auto ds = load_predictions(o.pred, o.schema.resolve());
  std::size_t before = 0, after = 0;
  for (auto& frame : ds.frames) {
    std::vector<BoundingBox> boxes;
    for (std::size_t i = 0; i < frame.persons.size(); ++i) {
      const auto& p = frame.persons[i];
      if (!p.box)
        throw Error(Errc::validation, "frame '" + frame.frame_id + "' person " +
                                          std::to_string(i) + ": nms needs a box");
      auto b = *p.box;
      b.score = *p.score;
      boxes.push_back(b);
    }
    std::vector<Person> kept;
    for (auto i : nms_indices(boxes, o.nms_iou)) kept.push_back(frame.persons[i]);
    before += frame.persons.size();
    after += kept.size();
    frame.persons = std::move(kept);
  }
  ds.meta["nms_iou"] = detail::format_double(o.nms_iou);
  save_dataset(ds, o.out);
  out << "nms kept " << after << " of " << before << " detections\n";
  return kExitOk;
}

int cmd_decode(const Options& o, std::ostream& out) {
  const auto& schema = o.schema.resolve();
  auto ds = load_predictions(o.detections, schema);
  const auto heatmaps = load_tensor_map(o.heatmaps);
  std::size_t decoded = 0;
  for (auto& frame : ds.frames) {
    for (std::size_t i = 0; i < frame.persons.size(); ++i) {
      auto& p = frame.persons[i];
      if (!p.box)
        throw Error(Errc::validation, "frame '" + frame.frame_id + "' person " +
                                          std::to_string(i) + ": decode needs a detection box");
      const auto name = frame.frame_id + "/" + p.id.value_or(std::to_string(i));
      if (!heatmaps.contains(name))
        throw Error(Errc::validation, "no heatmap tensor named '" + name + "'");
      const auto stack = HeatmapStack::from_tensor(heatmaps.at(name), o.stride);
      if (stack.keypoints != schema.size())
        throw Error(Errc::shape, "heatmap '" + name + "' has " + std::to_string(stack.keypoints) +
                                     " channels, schema has " + std::to_string(schema.size()));
      const auto crop = crop_transform(*p.box, kCropWidth, kCropHeight, o.padding);
      auto result = decode_heatmaps(stack, crop);
      result.pose.score.reset();
      p.pose = std::move(result.pose);
      ++decoded;
    }
  }
  ds.meta["decode_stride"] = detail::format_double(o.stride);
  ds.meta["crop_padding"] = detail::format_double(o.padding);
  save_dataset(ds, o.out);
  out << "decoded " << decoded << " poses\n";
  return kExitOk;
}

std::vector<double> parse_sigmas(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v > 0.0)) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw Error(Errc::range, "--sigmas: '" + item + "' is not a positive number");
    }
  }
  return values;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto& schema = o.schema.resolve();
  const auto gts = load_ground_truth(o.gt, schema);
  const auto preds = load_predictions(o.pred, schema);

  EvalConfig config;
  config.oks = o.sigmas.empty() ? default_oks_params(schema) : OksParams{parse_sigmas(o.sigmas)};
  if (config.oks.sigmas.size() != schema.size())
    throw Error(Errc::range, "--sigmas needs " + std::to_string(schema.size()) + " values");
  config.oks_threshold = o.oks_threshold;
  config.ospa = {o.ospa_cutoff, o.ospa_order};
  config.threads = o.threads;

  const auto report = evaluate(preds, gts, config);
  out << "ospa_iou " << fixed3(report.ospa_iou) << "\n";
  out << "ap_05 " << fixed3(report.ap_05) << "\n";
  if (!o.report.empty()) detail::write_file(o.report, report_to_json(report));
  if (!o.table.empty()) detail::write_file(o.table, report_to_csv(report));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Panoramic top-down pose pipeline tools", "panopose"};
  app.require_subcommand(1);
  Options o;

  auto* remap = app.add_subcommand("remap-weights", "Rebuild a keypoint head for the target schema");
  remap->add_option("--src", o.src, "Input tensor container")->required()->check(CLI::ExistingFile);
  remap->add_option("--out", o.out, "Output tensor container")->required();
  remap->add_option("--mapping", o.mapping, "Mapping config (defaults to the built-in COCO->JRDB table)")
      ->check(CLI::ExistingFile);
  remap->add_option("--weight-name", o.weight_name, "Final convolution weight [K, C, kh, kw]")->required();
  remap->add_option("--bias-name", o.bias_name, "Final convolution bias [K]");
  remap->add_flag("--verbatim-table1", o.schema.verbatim, "Use the literal counterpart table");

  auto* exportm = app.add_subcommand("export-mapping", "Write the built-in mapping as a config file");
  exportm->add_option("--out", o.out, "Destination (stdout when omitted)");
  exportm->add_flag("--verbatim-table1", o.schema.verbatim, "Use the literal counterpart table");

  auto* boxes = app.add_subcommand("boxes-from-poses", "Derive person boxes from labeled keypoints");
  boxes->add_option("--in", o.in, "Frame file")->required()->check(CLI::ExistingFile);
  boxes->add_option("--out", o.out, "Output frame file")->required();
  boxes->add_option("--margin", o.margin, "Margin per side as a fraction of the box side")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  o.schema.add(boxes);
  o.pano.add(boxes);

  auto* shift = app.add_subcommand("shift", "Cyclic left/right shift dropping seam-crossing persons");
  shift->add_option("--in", o.in, "Frame file")->required()->check(CLI::ExistingFile);
  shift->add_option("--out", o.out, "Output frame file")->required();
  auto* shift_opt = shift->add_option("--shift", o.shift, "Shift in pixels");
  shift->add_option("--seed", o.seed, "Seed for a uniform random shift in [0, width)")->excludes(shift_opt);
  o.schema.add(shift);
  o.pano.add(shift);

  auto* nms_cmd = app.add_subcommand("nms", "Greedy non-maximum suppression per frame");
  nms_cmd->add_option("--pred", o.pred, "Detection file (scores required)")->required()->check(CLI::ExistingFile);
  nms_cmd->add_option("--out", o.out, "Output file")->required();
  nms_cmd->add_option("--nms-iou", o.nms_iou, "IoU at or above which a box is suppressed")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  o.schema.add(nms_cmd);

  auto* decode = app.add_subcommand("decode", "Decode per-detection heatmaps into panorama poses");
  decode->add_option("--detections", o.detections, "Detection file with boxes and ids")
      ->required()
      ->check(CLI::ExistingFile);
  decode->add_option("--heatmaps", o.heatmaps, "Tensor container, one [K, h, w] tensor per '<frame_id>/<id>'")
      ->required()
      ->check(CLI::ExistingFile);
  decode->add_option("--out", o.out, "Output prediction file")->required();
  decode->add_option("--stride", o.stride, "Crop pixels per heatmap cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  decode->add_option("--padding", o.padding, "Crop padding factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  o.schema.add(decode);

  auto* eval = app.add_subcommand("eval", "Score predictions with OSPA_IOU and AP_0.5");
  eval->add_option("--gt", o.gt, "Ground-truth file")->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", o.pred, "Prediction file")->required()->check(CLI::ExistingFile);
  eval->add_option("--report", o.report, "Write the JSON report here");
  eval->add_option("--table", o.table, "Write the per-frame CSV table here");
  eval->add_option("--oks-threshold", o.oks_threshold, "OKS needed for a match")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--ospa-cutoff", o.ospa_cutoff, "OSPA cutoff c")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--ospa-order", o.ospa_order, "OSPA order p")
      ->check(CLI::Range(1.0, 1e6))
      ->capture_default_str();
  eval->add_option("--sigmas", o.sigmas, "Comma-separated OKS falloff constants, one per keypoint");
  eval->add_option("--threads", o.threads, "Worker threads for per-frame scoring")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  o.schema.add(eval);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (remap->parsed()) return cmd_remap_weights(o, out);
    if (exportm->parsed()) return cmd_export_mapping(o, out);
    if (boxes->parsed()) return cmd_boxes_from_poses(o, out);
    if (shift->parsed()) return cmd_shift(o, out, err);
    if (nms_cmd->parsed()) return cmd_nms(o, out);
    if (decode->parsed()) return cmd_decode(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
  } catch (const Error& e) {
    err << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace panopose::cli
