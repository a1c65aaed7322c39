// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "panopose/error.hpp"
#include "panopose/geometry.hpp"

namespace panopose {

namespace {

constexpr std::array<double, 17> kCocoSigmas{0.026, 0.025, 0.025, 0.035, 0.035, 0.079,
                                             0.079, 0.072, 0.072, 0.062, 0.062, 0.107,
                                             0.107, 0.087, 0.087, 0.089, 0.089};

}  // namespace

std::span<const double> coco_published_sigmas() { return kCocoSigmas; }

OksParams transfer_oks_params(const OksParams& source, const SchemaMapping& mapping) {
  if (source.sigmas.size() != mapping.source_size)
    throw Error(Errc::validation, "sigma vector length does not match the mapping source");
  OksParams out;
  for (const auto& entry : mapping.entries) {
    if (entry.empty()) throw Error(Errc::validation, "empty counterpart list");
    double sum = 0.0;
    for (auto s : entry) sum += source.sigmas.at(s);
    out.sigmas.push_back(sum / static_cast<double>(entry.size()));
  }
  return out;
}

OksParams default_oks_params(const KeypointSchema& schema) {
  OksParams coco;
  for (double s : kCocoSigmas) coco.sigmas.push_back(2.0 * s);
  if (schema.id() == kCocoSchemaId) return coco;
  if (schema.id() == kJrdbSchemaId) return transfer_oks_params(coco, default_mapping(false));
  if (schema.id() == kJrdbVerbatimSchemaId) return transfer_oks_params(coco, default_mapping(true));
  throw Error(Errc::validation, "no default OKS constants for schema '" + schema.id() + "'");
}

double oks(const Pose& pred, const Pose& gt, const OksParams& params, const BoundingBox& gt_box) {
  if (pred.size() != gt.size() || gt.size() != params.sigmas.size())
    throw Error(Errc::validation, "OKS needs poses and sigmas of equal length");
  const double area = std::max(gt_box.area(), 0.0);
  double sum = 0.0;
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto& g = gt.keypoints[i];
    if (!g.labeled()) continue;
    ++labeled;
    const double dx = pred.keypoints[i].x - g.x;
    const double dy = pred.keypoints[i].y - g.y;
    const double d2 = dx * dx + dy * dy;
    const double k = params.sigmas[i];
    const double denom = 2.0 * area * k * k;
    sum += denom > 0.0 ? std::exp(-d2 / denom) : (d2 == 0.0 ? 1.0 : 0.0);
  }
  if (labeled == 0) throw Error(Errc::validation, "ground-truth pose has no labeled keypoints");
  return sum / static_cast<double>(labeled);
}

double ospa_from_distances(const CostMatrix& distances, const OspaParams& params) {
  if (!(params.cutoff > 0.0) || !(params.order >= 1.0))
    throw Error(Errc::range, "OSPA needs cutoff > 0 and order >= 1");
  const std::size_t m = distances.rows(), n = distances.cols();
  const std::size_t big = std::max(m, n);
  if (big == 0) return 0.0;
  const double c = params.cutoff, p = params.order;

  CostMatrix cost(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::min(c, std::max(0.0, distances(i, j)));
      cost(i, j) = p == 1.0 ? d : std::pow(d, p);
    }
  const double matched = min_cost_assignment(cost).total_cost;
  const double penalty = (p == 1.0 ? c : std::pow(c, p)) * static_cast<double>(big - std::min(m, n));
  const double mean = (matched + penalty) / static_cast<double>(big);
  return p == 1.0 ? mean : std::pow(mean, 1.0 / p);
}

double ospa_iou_frame(const FrameAnnotations& pred, const FrameAnnotations& gt,
                      const OspaParams& params) {
  std::vector<std::optional<BoundingBox>> pb, gb;
  for (const auto& p : pred.persons) pb.push_back(effective_box(p));
  for (const auto& g : gt.persons) gb.push_back(effective_box(g));
  return ospa(std::span<const std::optional<BoundingBox>>(pb),
              std::span<const std::optional<BoundingBox>>(gb),
              [](const auto& a, const auto& b) { return (a && b) ? 1.0 - iou(*a, *b) : 1.0; },
              params);
}

namespace {

bool matchable_gt(const Person& g) {
  return g.pose && std::any_of(g.pose->keypoints.begin(), g.pose->keypoints.end(),
                               [](const Keypoint& k) { return k.labeled(); });
}

double require_score(const Person& p, const std::string& frame_id, std::size_t index) {
  if (!p.score)
    throw Error(Errc::validation, "frame '" + frame_id + "' person " + std::to_string(index) +
                                      ": prediction without score");
  return *p.score;
}

// Prediction indices in descending score order; input order breaks ties.
std::vector<std::size_t> score_order(const FrameAnnotations& pred) {
  std::vector<std::size_t> order(pred.persons.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i : order) require_score(pred.persons[i], pred.frame_id, i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *pred.persons[a].score > *pred.persons[b].score;
  });
  return order;
}

// Per-frame matching outcome needed for the global precision/recall curve.
struct FrameMatch {
  MatchResult result;
  std::vector<std::pair<double, bool>> ranked;  // (score, true positive), score order
  std::size_t num_gt = 0;
};

FrameMatch match_frame_detail(const FrameAnnotations& pred, const FrameAnnotations& gt,
                              const OksParams& params, double threshold) {
  FrameMatch fm;
  std::vector<std::size_t> gts;
  std::vector<BoundingBox> gt_boxes;
  for (std::size_t j = 0; j < gt.persons.size(); ++j) {
    if (!matchable_gt(gt.persons[j])) continue;
    gts.push_back(j);
    const auto& g = gt.persons[j];
    gt_boxes.push_back(g.box ? *g.box : *pose_extent(*g.pose));
  }
  fm.num_gt = gts.size();

  std::vector<char> used(gts.size(), 0);
  for (std::size_t i : score_order(pred)) {
    const auto& p = pred.persons[i];
    double best = -1.0;
    std::size_t best_k = gts.size();
    if (p.pose) {
      for (std::size_t k = 0; k < gts.size(); ++k) {
        if (used[k]) continue;
        const double s = oks(*p.pose, *gt.persons[gts[k]].pose, params, gt_boxes[k]);
        if (s > best) {
          best = s;
          best_k = k;
        }
      }
    }
    const bool tp = best_k < gts.size() && best >= threshold;
    if (tp) {
      used[best_k] = 1;
      fm.result.pairs.push_back({i, gts[best_k], best});
    } else {
      fm.result.unmatched_predictions.push_back(i);
    }
    fm.ranked.emplace_back(*p.score, tp);
  }
  for (std::size_t k = 0; k < gts.size(); ++k)
    if (!used[k]) fm.result.unmatched_ground_truths.push_back(gts[k]);
  return fm;
}

// 101-point interpolated AP from (score, tp) entries ranked by score.
double interpolated_ap(std::vector<std::tuple<double, std::size_t, std::size_t, bool>> ranked,
                       std::size_t num_gt) {
  if (num_gt == 0) return 0.0;
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<std::size_t> tp_at;  // cumulative true positives after each rank
  std::vector<double> precision;
  std::size_t tp = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (std::get<3>(ranked[r])) ++tp;
    tp_at.push_back(tp);
    precision.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
  }
  // Precision envelope: best precision at this rank or any later one.
  for (std::size_t r = precision.size(); r-- > 1;)
    precision[r - 1] = std::max(precision[r - 1], precision[r]);

  double sum = 0.0;
  std::size_t r = 0;
  for (std::size_t level = 0; level <= 100; ++level) {
    // recall >= level/100  <=>  100 * tp >= level * num_gt
    while (r < tp_at.size() && 100 * tp_at[r] < level * num_gt) ++r;
    if (r < tp_at.size()) sum += precision[r];
  }
  return sum / 101.0;
}

struct Indexed {
  std::vector<const FrameAnnotations*> gt;    // sorted by frame id
  std::vector<const FrameAnnotations*> pred;  // aligned with gt; nullptr when absent
};

void require_unique_ids(const Dataset& ds, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& f : ds.frames)
    if (!seen.insert(f.frame_id).second)
      throw Error(Errc::validation, std::string(what) + ": duplicate frame id '" + f.frame_id + "'");
}

Indexed index_frames(const Dataset& preds, const Dataset& gts) {
  if (preds.schema != gts.schema)
    throw Error(Errc::validation, "schema mismatch: predictions use '" + preds.schema +
                                      "', ground truth uses '" + gts.schema + "'");
  if (!(preds.pano == gts.pano)) throw Error(Errc::validation, "panorama size mismatch");
  require_unique_ids(preds, "predictions");
  require_unique_ids(gts, "ground truth");

  Indexed ix;
  for (const auto& f : gts.frames) ix.gt.push_back(&f);
  std::sort(ix.gt.begin(), ix.gt.end(),
            [](const auto* a, const auto* b) { return a->frame_id < b->frame_id; });
  std::unordered_map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < ix.gt.size(); ++i) pos.emplace(ix.gt[i]->frame_id, i);
  ix.pred.assign(ix.gt.size(), nullptr);
  for (const auto& f : preds.frames) {
    auto it = pos.find(f.frame_id);
    if (it == pos.end())
      throw Error(Errc::validation, "prediction frame '" + f.frame_id + "' is not in the ground truth");
    ix.pred[it->second] = &f;
  }
  return ix;
}

template <typename Fn>
void for_each_frame(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

MatchResult match_frame(const FrameAnnotations& pred, const FrameAnnotations& gt,
                        const OksParams& params, double threshold) {
  return match_frame_detail(pred, gt, params, threshold).result;
}

double ap_at_oks(const Dataset& preds, const Dataset& gts, const OksParams& params,
                 double threshold) {
  const auto ix = index_frames(preds, gts);
  const FrameAnnotations empty{};
  std::vector<std::tuple<double, std::size_t, std::size_t, bool>> ranked;
  std::size_t num_gt = 0;
  for (std::size_t f = 0; f < ix.gt.size(); ++f) {
    const auto fm = match_frame_detail(ix.pred[f] ? *ix.pred[f] : empty, *ix.gt[f], params, threshold);
    num_gt += fm.num_gt;
    for (std::size_t r = 0; r < fm.ranked.size(); ++r)
      ranked.emplace_back(fm.ranked[r].first, f, r, fm.ranked[r].second);
  }
  return interpolated_ap(std::move(ranked), num_gt);
}

EvalReport evaluate(const Dataset& preds, const Dataset& gts, const EvalConfig& config) {
  const auto ix = index_frames(preds, gts);
  EvalReport report;
  report.schema = gts.schema;
  report.config = config;
  if (report.config.oks.sigmas.empty())
    report.config.oks = default_oks_params(schema_by_id(gts.schema));
  const auto& params = report.config.oks;

  const FrameAnnotations empty{};
  std::vector<FrameMatch> matches(ix.gt.size());
  report.per_frame.resize(ix.gt.size());
  for_each_frame(ix.gt.size(), config.threads, [&](std::size_t f) {
    const auto& gt = *ix.gt[f];
    const auto& pred = ix.pred[f] ? *ix.pred[f] : empty;
    matches[f] = match_frame_detail(pred, gt, params, report.config.oks_threshold);
    auto& row = report.per_frame[f];
    row.frame_id = gt.frame_id;
    row.ospa_iou = ospa_iou_frame(pred, gt, report.config.ospa);
    row.num_pred = pred.persons.size();
    row.num_gt = gt.persons.size();
    row.num_matched = matches[f].result.pairs.size();
  });

  std::vector<std::tuple<double, std::size_t, std::size_t, bool>> ranked;
  std::size_t num_gt = 0;
  double ospa_sum = 0.0;
  for (std::size_t f = 0; f < matches.size(); ++f) {
    num_gt += matches[f].num_gt;
    for (std::size_t r = 0; r < matches[f].ranked.size(); ++r)
      ranked.emplace_back(matches[f].ranked[r].first, f, r, matches[f].ranked[r].second);
    ospa_sum += report.per_frame[f].ospa_iou;
  }
  report.ospa_iou = matches.empty() ? 0.0 : ospa_sum / static_cast<double>(matches.size());
  report.ap_05 = interpolated_ap(std::move(ranked), num_gt);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["ospa_iou"] = report.ospa_iou;
  doc["ap_05"] = report.ap_05;
  doc["num_frames"] = report.per_frame.size();
  auto& cfg = doc["config"];
  cfg["schema"] = report.schema;
  cfg["oks_threshold"] = report.config.oks_threshold;
  cfg["sigmas"] = report.config.oks.sigmas;
  cfg["oks_scale"] = "ground-truth box area";
  cfg["ospa_cutoff"] = report.config.ospa.cutoff;
  cfg["ospa_order"] = report.config.ospa.order;
  cfg["ospa_base_distance"] = "1 - iou";
  cfg["ap_interpolation"] = "101-point";
  cfg["ap_ranking"] = "dataset-global";
  auto& rows = doc["per_frame"] = nlohmann::ordered_json::array();
  for (const auto& r : report.per_frame) {
    nlohmann::ordered_json row;
    row["frame_id"] = r.frame_id;
    row["ospa_iou"] = r.ospa_iou;
    row["num_pred"] = r.num_pred;
    row["num_gt"] = r.num_gt;
    row["num_matched"] = r.num_matched;
    rows.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string report_to_csv(const EvalReport& report) {
  std::string out = "frame_id,ospa_iou,num_pred,num_gt,num_matched\n";
  char buf[32];
  for (const auto& r : report.per_frame) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.ospa_iou);
    out += csv_field(r.frame_id) + "," + buf + "," + std::to_string(r.num_pred) + "," +
           std::to_string(r.num_gt) + "," + std::to_string(r.num_matched) + "\n";
  }
  return out;
}

}  // namespace panopose
