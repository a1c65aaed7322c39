// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panopose/types.hpp"

namespace panopose {

inline constexpr double kDefaultBoxMargin = 0.1;
inline constexpr double kDefaultNmsIou = 0.5;
inline constexpr double kDefaultCropPadding = 1.25;
inline constexpr int kCropWidth = 288;
inline constexpr int kCropHeight = 384;

/// 2x3 matrix [a b c; d e f] mapping (x, y) to (a x + b y + c, d x + e y + f).
struct AffineTransform {
  std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(double dx, double dy) {
    return {{1.0, 0.0, dx, 0.0, 1.0, dy}};
  }

  double determinant() const { return m[0] * m[4] - m[1] * m[3]; }

  /// Applies `this` after `first`.
  AffineTransform compose(const AffineTransform& first) const;

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

Point apply_transform(const AffineTransform& t, Point p);

/// Throws Errc::singular when the linear part is not invertible.
AffineTransform invert_transform(const AffineTransform& t);

/// Tight box over keypoints with visibility > 0, with no margin and no
/// clamping. nullopt when no keypoint qualifies. The extent may be degenerate.
std::optional<BoundingBox> pose_extent(const Pose& pose);

/// Tight box over labeled keypoints, grown by `margin` times the box side on
/// each side and clamped to the panorama. Throws Errc::validation without
/// labeled keypoints and Errc::singular for a zero-width or zero-height extent.
BoundingBox bbox_from_pose(const Pose& pose, double margin, const PanoramaSpec& pano);

/// The person's box, else the tight extent of its labeled keypoints.
std::optional<BoundingBox> effective_box(const Person& person);

/// Cyclic horizontal shift by `shift` pixels (taken modulo the width). Persons
/// whose box would straddle the left/right seam afterwards are dropped.
FrameAnnotations shift_frame(const FrameAnnotations& frame, std::int64_t shift,
                             const PanoramaSpec& pano);

Dataset shift_dataset(const Dataset& ds, std::int64_t shift);

/// Intersection over union of continuous areas; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Greedy NMS. Keeps the highest-scoring remaining box and drops every other
/// box with IoU >= `iou_threshold` against it. Output is sorted by descending
/// score; equal scores keep their input order.
std::vector<BoundingBox> nms(std::span<const BoundingBox> dets, double iou_threshold);

/// Indices into `dets` of the boxes nms() keeps, in output order.
std::vector<std::size_t> nms_indices(std::span<const BoundingBox> dets, double iou_threshold);

/// Maps `box`, widened about its center to the out_w:out_h aspect and scaled
/// by `padding`, onto [0, out_w) x [0, out_h).
AffineTransform crop_transform(const BoundingBox& box, int out_w = kCropWidth,
                               int out_h = kCropHeight, double padding = kDefaultCropPadding);

/// The source-space rectangle that crop_transform maps onto the output.
BoundingBox crop_region(const BoundingBox& box, int out_w = kCropWidth,
                        int out_h = kCropHeight, double padding = kDefaultCropPadding);

}  // namespace panopose
