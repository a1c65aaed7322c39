// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace panopose {

/// Visibility flag stored per keypoint; encoded 0/1/2 on disk.
enum class Visibility : std::uint8_t {
  not_labeled = 0,
  labeled_invisible = 1,
  labeled_visible = 2,
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  Visibility visibility = Visibility::not_labeled;

  bool labeled() const { return visibility != Visibility::not_labeled; }

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct Pose {
  std::vector<Keypoint> keypoints;
  std::optional<double> score;

  std::size_t size() const { return keypoints.size(); }

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Half-open axis-aligned rectangle [x1, x2) x [y1, y2) in panorama pixels.
/// Stored boxes never wrap around the seam.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  double score = 1.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  Point center() const { return {0.5 * (x1 + x2), 0.5 * (y1 + y2)}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct PanoramaSpec {
  std::int64_t width = 3760;
  std::int64_t height = 480;

  friend bool operator==(const PanoramaSpec&, const PanoramaSpec&) = default;
};

struct Person {
  std::optional<std::string> id;
  std::optional<BoundingBox> box;
  std::optional<Pose> pose;
  std::optional<double> score;

  friend bool operator==(const Person&, const Person&) = default;
};

struct FrameAnnotations {
  std::string frame_id;
  std::vector<Person> persons;

  friend bool operator==(const FrameAnnotations&, const FrameAnnotations&) = default;
};

struct Dataset {
  std::string schema;
  PanoramaSpec pano;
  // Free-form provenance (seeds, margins, shifts) carried through round trips.
  std::map<std::string, std::string> meta;
  std::vector<FrameAnnotations> frames;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace panopose
