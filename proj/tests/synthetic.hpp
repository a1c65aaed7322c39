// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic panorama scenes shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "panopose/geometry.hpp"
#include "panopose/schema.hpp"
#include "panopose/types.hpp"

namespace panopose::testing {

// Multiples of 1/8 keep sums and differences of coordinates exact.
inline double quantize(double v) { return std::round(v * 8.0) / 8.0; }

struct SceneOptions {
  PanoramaSpec pano{3760, 480};
  std::size_t frames = 10;
  std::size_t min_persons = 0;
  std::size_t max_persons = 8;
  bool with_boxes = true;
};

/// Ground truth in the jrdb17 schema. Each person's box is the tight extent of
/// its labeled keypoints, so pose-only predictions can match it exactly.
inline Dataset make_ground_truth(std::uint64_t seed, const SceneOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto K = jrdb17().size();
  const auto W = static_cast<double>(opt.pano.width);
  const auto H = static_cast<double>(opt.pano.height);

  Dataset ds{std::string(kJrdbSchemaId), opt.pano, {}, {}};
  for (std::size_t f = 0; f < opt.frames; ++f) {
    FrameAnnotations frame;
    char id[32];
    std::snprintf(id, sizeof(id), "frame_%04zu", f);
    frame.frame_id = id;
    const auto n = opt.min_persons +
                   static_cast<std::size_t>(unit(rng) * static_cast<double>(opt.max_persons - opt.min_persons + 1));
    for (std::size_t p = 0; p < std::min(n, opt.max_persons); ++p) {
      const double bw = 40.0 + 160.0 * unit(rng);
      const double bh = 120.0 + 300.0 * unit(rng);
      const double x0 = (W - bw - 2.0) * unit(rng) + 1.0;
      const double y0 = (H - bh - 2.0) * unit(rng) + 1.0;
      Pose pose;
      for (std::size_t k = 0; k < K; ++k) {
        const double r = unit(rng);
        const auto vis = r < 0.1   ? Visibility::not_labeled
                         : r < 0.3 ? Visibility::labeled_invisible
                                   : Visibility::labeled_visible;
        pose.keypoints.push_back({quantize(x0 + bw * unit(rng)), quantize(y0 + bh * unit(rng)), vis});
      }
      // Two fixed labeled corners keep the extent non-degenerate.
      pose.keypoints[0] = {quantize(x0), quantize(y0), Visibility::labeled_visible};
      pose.keypoints[K - 1] = {quantize(x0 + bw), quantize(y0 + bh), Visibility::labeled_visible};
      Person person;
      person.id = std::to_string(p);
      if (opt.with_boxes) person.box = *pose_extent(pose);
      person.pose = std::move(pose);
      frame.persons.push_back(std::move(person));
    }
    ds.frames.push_back(std::move(frame));
  }
  return ds;
}

/// Pose-only predictions: every ground-truth keypoint moved by sigma * N(0, 1).
/// The normal draws and scores depend only on `seed`, so different sigmas
/// perturb along the same directions.
inline Dataset perturb(const Dataset& gt, double sigma, std::uint64_t seed, bool quantized = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  Dataset pred = gt;
  pred.meta.clear();
  for (auto& frame : pred.frames) {
    for (auto& person : frame.persons) {
      person.box.reset();
      person.score = unit(rng);
      for (auto& kp : person.pose->keypoints) {
        const double dx = normal(rng), dy = normal(rng);
        kp.x += sigma * dx;
        kp.y += sigma * dy;
        if (quantized) {
          kp.x = quantize(kp.x);
          kp.y = quantize(kp.y);
        }
      }
    }
  }
  return pred;
}

}  // namespace panopose::testing
