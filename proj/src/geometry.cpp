// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "panopose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "panopose/error.hpp"

namespace panopose {

AffineTransform AffineTransform::compose(const AffineTransform& first) const {
  const auto& a = m;
  const auto& b = first.m;
  return {{a[0] * b[0] + a[1] * b[3], a[0] * b[1] + a[1] * b[4], a[0] * b[2] + a[1] * b[5] + a[2],
           a[3] * b[0] + a[4] * b[3], a[3] * b[1] + a[4] * b[4], a[3] * b[2] + a[4] * b[5] + a[5]}};
}

Point apply_transform(const AffineTransform& t, Point p) {
  const auto& m = t.m;
  return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

AffineTransform invert_transform(const AffineTransform& t) {
  const double det = t.determinant();
  if (det == 0.0 || !std::isfinite(det)) throw Error(Errc::singular, "affine transform is singular");
  const auto& m = t.m;
  const double a = m[4] / det, b = -m[1] / det;
  const double d = -m[3] / det, e = m[0] / det;
  return {{a, b, -(a * m[2] + b * m[5]), d, e, -(d * m[2] + e * m[5])}};
}

std::optional<BoundingBox> pose_extent(const Pose& pose) {
  std::optional<BoundingBox> box;
  for (const auto& kp : pose.keypoints) {
    if (!kp.labeled()) continue;
    if (!box) {
      box = BoundingBox{kp.x, kp.y, kp.x, kp.y, 1.0};
      continue;
    }
    box->x1 = std::min(box->x1, kp.x);
    box->y1 = std::min(box->y1, kp.y);
    box->x2 = std::max(box->x2, kp.x);
    box->y2 = std::max(box->y2, kp.y);
  }
  return box;
}

BoundingBox bbox_from_pose(const Pose& pose, double margin, const PanoramaSpec& pano) {
  if (!(margin >= 0.0)) throw Error(Errc::range, "box margin must be non-negative");
  auto extent = pose_extent(pose);
  if (!extent) throw Error(Errc::validation, "pose has no visible keypoints");
  auto box = *extent;
  const double mx = margin * box.width();
  const double my = margin * box.height();
  box.x1 = std::clamp(box.x1 - mx, 0.0, static_cast<double>(pano.width));
  box.x2 = std::clamp(box.x2 + mx, 0.0, static_cast<double>(pano.width));
  box.y1 = std::clamp(box.y1 - my, 0.0, static_cast<double>(pano.height));
  box.y2 = std::clamp(box.y2 + my, 0.0, static_cast<double>(pano.height));
  if (!(box.x1 < box.x2 && box.y1 < box.y2))
    throw Error(Errc::singular, "pose extent is degenerate inside the panorama");
  box.score = 1.0;
  return box;
}

std::optional<BoundingBox> effective_box(const Person& person) {
  if (person.box) return person.box;
  if (person.pose) return pose_extent(*person.pose);
  return std::nullopt;
}

namespace {

void translate_person(Person& p, double dx) {
  if (p.box) {
    p.box->x1 += dx;
    p.box->x2 += dx;
  }
  if (p.pose)
    for (auto& kp : p.pose->keypoints) kp.x += dx;
}

}  // namespace

FrameAnnotations shift_frame(const FrameAnnotations& frame, std::int64_t shift,
                             const PanoramaSpec& pano) {
  if (pano.width <= 0) throw Error(Errc::range, "panorama width must be positive");
  const std::int64_t w = pano.width;
  const std::int64_t s = ((shift % w) + w) % w;
  const auto wd = static_cast<double>(w);
  const auto period = [&](double x) {
    return static_cast<std::int64_t>(std::floor((x + static_cast<double>(s)) / wd));
  };

  FrameAnnotations out{frame.frame_id, {}};
  for (const auto& person : frame.persons) {
    auto box = effective_box(person);
    Person moved = person;
    if (!box) {
      // Nothing labeled to anchor on; wrap each coordinate on its own.
      if (moved.pose)
        for (auto& kp : moved.pose->keypoints)
          kp.x = kp.x + static_cast<double>(s - period(kp.x) * w);
      out.persons.push_back(std::move(moved));
      continue;
    }
    // The whole person moves by one offset: shift minus the wraps its left edge takes.
    const std::int64_t k = period(box->x1);
    const auto dx = static_cast<double>(s - k * w);
    bool crosses = box->x2 + dx > wd;
    if (person.pose)
      for (const auto& kp : person.pose->keypoints)
        if (kp.labeled() && period(kp.x) != k) crosses = true;
    if (crosses) continue;
    translate_person(moved, dx);
    out.persons.push_back(std::move(moved));
  }
  return out;
}

Dataset shift_dataset(const Dataset& ds, std::int64_t shift) {
  Dataset out = ds;
  for (auto& f : out.frames) f = shift_frame(f, shift, ds.pano);
  return out;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) {
    // Both boxes have zero area: only coincident ones overlap.
    return (a.x1 == b.x1 && a.y1 == b.y1 && a.x2 == b.x2 && a.y2 == b.y2) ? 1.0 : 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::size_t> nms_indices(std::span<const BoundingBox> dets, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return dets[i].score > dets[j].score; });
  std::vector<std::size_t> keep;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(keep.begin(), keep.end(), [&](std::size_t k) {
      return iou(dets[k], dets[i]) >= iou_threshold;
    });
    if (!suppressed) keep.push_back(i);
  }
  return keep;
}

std::vector<BoundingBox> nms(std::span<const BoundingBox> dets, double iou_threshold) {
  std::vector<BoundingBox> out;
  for (std::size_t i : nms_indices(dets, iou_threshold)) out.push_back(dets[i]);
  return out;
}

BoundingBox crop_region(const BoundingBox& box, int out_w, int out_h, double padding) {
  if (out_w <= 0 || out_h <= 0) throw Error(Errc::range, "crop size must be positive");
  if (!(padding > 0.0)) throw Error(Errc::range, "crop padding must be positive");
  double w = box.width();
  double h = box.height();
  if (!(w > 0.0 && h > 0.0)) throw Error(Errc::singular, "degenerate box");
  // Grow the short side so that w:h == out_w:out_h.
  if (w * out_h > h * out_w) {
    h = w * out_h / out_w;
  } else if (w * out_h < h * out_w) {
    w = h * out_w / out_h;
  }
  w *= padding;
  h *= padding;
  const auto c = box.center();
  return {c.x - 0.5 * w, c.y - 0.5 * h, c.x + 0.5 * w, c.y + 0.5 * h, box.score};
}

AffineTransform crop_transform(const BoundingBox& box, int out_w, int out_h, double padding) {
  const auto region = crop_region(box, out_w, out_h, padding);
  const double sx = out_w / region.width();
  const double sy = out_h / region.height();
  return {{sx, 0.0, -sx * region.x1, 0.0, sy, -sy * region.y1}};
}

}  // namespace panopose
