// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "panopose/schema.hpp"
#include "panopose/types.hpp"

namespace panopose {

// ---------------------------------------------------------------------------
// Object keypoint similarity
// ---------------------------------------------------------------------------

/// Per-keypoint falloff constants k_i. OKS term i is
/// exp(-d_i^2 / (2 s^2 k_i^2)) with s^2 the ground-truth box area.
struct OksParams {
  std::vector<double> sigmas;

  friend bool operator==(const OksParams&, const OksParams&) = default;
};

/// COCO's published per-keypoint sigmas, in coco17 order.
std::span<const double> coco_published_sigmas();

/// Falloff constants for a built-in schema. COCO uses k = 2 * sigma; schemas
/// reached through a counterpart mapping take the mean k of the counterparts.
OksParams default_oks_params(const KeypointSchema& schema);
OksParams transfer_oks_params(const OksParams& source, const SchemaMapping& mapping);

/// Mean similarity over the keypoints labeled in `gt`. Throws
/// Errc::validation when nothing is labeled or lengths disagree.
double oks(const Pose& pred, const Pose& gt, const OksParams& params, const BoundingBox& gt_box);

// ---------------------------------------------------------------------------
// Assignment
// ---------------------------------------------------------------------------

/// Dense row-major matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  CostMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Injective pairing of the smaller dimension into the larger one.
/// `pairs` holds (row, col) sorted by the index on the smaller side;
/// `total_cost` sums the paired entries in that order.
struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

/// Exact minimum-cost assignment (shortest augmenting path with potentials).
/// Among minimizers, returns the lexicographically smallest sequence of
/// partners for the smaller side. Throws Errc::range on non-finite entries.
Assignment min_cost_assignment(const CostMatrix& cost);

inline constexpr std::size_t kBruteForceLimit = 8;

/// Enumerates every injective assignment in lexicographic order. Throws
/// Errc::range when min(rows, cols) exceeds kBruteForceLimit.
Assignment brute_force_assignment(const CostMatrix& cost);

// ---------------------------------------------------------------------------
// OSPA
// ---------------------------------------------------------------------------

struct OspaParams {
  double cutoff = 1.0;
  double order = 1.0;

  friend bool operator==(const OspaParams&, const OspaParams&) = default;
};

/// OSPA from base distances between m predictions (rows) and n ground truths
/// (cols): ((min-cost assignment of min(c, d)^p + c^p |n - m|) / max(m, n))^(1/p).
/// Zero when both sets are empty.
double ospa_from_distances(const CostMatrix& distances, const OspaParams& params = {});

template <typename T, typename U, typename Distance>
double ospa(std::span<const T> preds, std::span<const U> gts, Distance&& base_distance,
            const OspaParams& params = {}) {
  CostMatrix d(preds.size(), gts.size());
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t j = 0; j < gts.size(); ++j) d(i, j) = base_distance(preds[i], gts[j]);
  return ospa_from_distances(d, params);
}

/// OSPA over persons with base distance 1 - IoU. A person without a box is
/// represented by the tight extent of its labeled keypoints; a person with
/// neither sits at distance 1 from everything.
double ospa_iou_frame(const FrameAnnotations& pred, const FrameAnnotations& gt,
                      const OspaParams& params = {});

// ---------------------------------------------------------------------------
// Average precision
// ---------------------------------------------------------------------------

struct MatchResult {
  struct Pair {
    std::size_t prediction;
    std::size_t ground_truth;
    double similarity;
  };
  std::vector<Pair> pairs;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_ground_truths;
};

/// Greedy OKS matching inside one frame: predictions in descending score order
/// each take the unmatched ground truth with the highest OKS, if it reaches
/// `threshold`. Ground truths without labeled keypoints are not matchable and
/// are left out of every list.
MatchResult match_frame(const FrameAnnotations& pred, const FrameAnnotations& gt,
                        const OksParams& params, double threshold);

/// COCO-style AP at one OKS threshold: dataset-global ranking by score and a
/// 101-point interpolated precision/recall area. Zero when no ground truth is
/// matchable.
double ap_at_oks(const Dataset& preds, const Dataset& gts, const OksParams& params,
                 double threshold = 0.5);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalConfig {
  OksParams oks;
  double oks_threshold = 0.5;
  OspaParams ospa;
  unsigned threads = 1;
};

struct FrameReport {
  std::string frame_id;
  double ospa_iou = 0.0;
  std::size_t num_pred = 0;
  std::size_t num_gt = 0;
  std::size_t num_matched = 0;

  friend bool operator==(const FrameReport&, const FrameReport&) = default;
};

struct EvalReport {
  double ospa_iou = 0.0;
  double ap_05 = 0.0;
  std::string schema;
  EvalConfig config;
  std::vector<FrameReport> per_frame;  // sorted by frame id
};

/// Scores predictions against ground truth. Frames missing from `preds` count
/// as empty. Throws Errc::validation on schema or panorama mismatch, duplicate
/// frame ids, or prediction frames absent from the ground truth.
EvalReport evaluate(const Dataset& preds, const Dataset& gts, const EvalConfig& config);

std::string report_to_json(const EvalReport& report);
/// One row per frame: frame_id,ospa_iou,num_pred,num_gt,num_matched
std::string report_to_csv(const EvalReport& report);

}  // namespace panopose
