// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "panopose/geometry.hpp"
#include "panopose/types.hpp"
#include "panopose/weights.hpp"

namespace panopose {

/// K score grids of h x w cells, row-major, plus the crop pixels per cell.
struct HeatmapStack {
  std::size_t keypoints = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double stride = 4.0;
  std::vector<float> values;

  float at(std::size_t k, std::size_t row, std::size_t col) const {
    return values[(k * height + row) * width + col];
  }

  /// Reads a [K, h, w] F32 tensor.
  static HeatmapStack from_tensor(const TensorRecord& rec, double stride);
};

struct DecodedPose {
  Pose pose;
  std::vector<double> confidence;
};

/// Per keypoint: argmax cell (first in row-major order on ties), a quarter-cell
/// step toward the larger neighbour on each axis where both neighbours exist,
/// cell (i, j) centered at ((j + 0.5) * stride, (i + 0.5) * stride) in crop
/// pixels, then back through the inverse of `crop` into panorama pixels.
/// Keypoints come out labeled-visible; the pose score is the mean confidence.
DecodedPose decode_heatmaps(const HeatmapStack& stack, const AffineTransform& crop);

}  // namespace panopose
