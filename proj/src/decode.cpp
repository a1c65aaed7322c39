// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/decode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "panopose/error.hpp"

namespace panopose {

HeatmapStack HeatmapStack::from_tensor(const TensorRecord& rec, double stride) {
  if (rec.shape().size() != 3)
    throw Error(Errc::shape, "heatmap tensor must have rank 3 [K, h, w]");
  HeatmapStack stack;
  stack.keypoints = static_cast<std::size_t>(rec.shape()[0]);
  stack.height = static_cast<std::size_t>(rec.shape()[1]);
  stack.width = static_cast<std::size_t>(rec.shape()[2]);
  stack.stride = stride;
  stack.values = rec.to_f32();
  return stack;
}

namespace {

// Quarter-cell step toward the larger neighbour; zero at borders and on ties.
double quarter_step(float before, float after) {
  if (after > before) return 0.25;
  if (after < before) return -0.25;
  return 0.0;
}

}  // namespace

DecodedPose decode_heatmaps(const HeatmapStack& stack, const AffineTransform& crop) {
  if (stack.keypoints == 0 || stack.height == 0 || stack.width == 0)
    throw Error(Errc::shape, "empty heatmap grid");
  if (stack.values.size() != stack.keypoints * stack.height * stack.width)
    throw Error(Errc::shape, "heatmap buffer does not match its K x h x w extents");
  if (!(stack.stride > 0.0)) throw Error(Errc::range, "heatmap stride must be positive");
  const auto back = invert_transform(crop);

  DecodedPose out;
  out.pose.keypoints.reserve(stack.keypoints);
  out.confidence.reserve(stack.keypoints);
  double total = 0.0;
  const std::size_t cells = stack.height * stack.width;
  for (std::size_t k = 0; k < stack.keypoints; ++k) {
    const float* grid = stack.values.data() + k * cells;
    std::size_t best = 0;
    for (std::size_t c = 1; c < cells; ++c)
      if (grid[c] > grid[best]) best = c;
    const std::size_t row = best / stack.width;
    const std::size_t col = best % stack.width;

    double dx = 0.0, dy = 0.0;
    if (col > 0 && col + 1 < stack.width) dx = quarter_step(grid[best - 1], grid[best + 1]);
    if (row > 0 && row + 1 < stack.height)
      dy = quarter_step(grid[best - stack.width], grid[best + stack.width]);

    const Point in_crop{(static_cast<double>(col) + dx + 0.5) * stack.stride,
                        (static_cast<double>(row) + dy + 0.5) * stack.stride};
    const auto p = apply_transform(back, in_crop);
    out.pose.keypoints.push_back({p.x, p.y, Visibility::labeled_visible});
    out.confidence.push_back(static_cast<double>(grid[best]));
    total += grid[best];
  }
  out.pose.score = std::clamp(total / static_cast<double>(stack.keypoints), 0.0, 1.0);
  return out;
}

}  // namespace panopose
