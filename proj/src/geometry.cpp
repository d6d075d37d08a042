/* Copyright 2026 The DCL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dcl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dcl {

bool BBox::valid() const {
  return xmin >= 0.0 && ymin >= 0.0 && xmax <= 1.0 && ymax <= 1.0 && xmin <= xmax &&
         ymin <= ymax;
}

BBox to_corners(const CenterBox& c) {
  return {c.cx - 0.5 * c.w, c.cy - 0.5 * c.h, c.cx + 0.5 * c.w, c.cy + 0.5 * c.h};
}

CenterBox to_center(const BBox& b) {
  return {0.5 * (b.xmin + b.xmax), 0.5 * (b.ymin + b.ymax), b.width(), b.height()};
}

BBox clip_box(const BBox& b) {
  BBox r{std::clamp(b.xmin, 0.0, 1.0), std::clamp(b.ymin, 0.0, 1.0),
         std::clamp(b.xmax, 0.0, 1.0), std::clamp(b.ymax, 0.0, 1.0)};
  r.xmax = std::max(r.xmax, r.xmin);
  r.ymax = std::max(r.ymax, r.ymin);
  return r;
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double l1_distance(const BBox& a, const BBox& b) {
  return std::abs(a.xmin - b.xmin) + std::abs(a.ymin - b.ymin) + std::abs(a.xmax - b.xmax) +
         std::abs(a.ymax - b.ymax);
}

GeomTransform GeomTransform::crop(const BBox& window) {
  if (!window.valid() || !(window.area() > 0.0)) {
    throw std::invalid_argument("crop window must be a valid box with positive area");
  }
  GeomTransform t;
  t.kind = TransformKind::kCropResize;
  t.window = window;
  return t;
}

std::string GeomTransform::describe() const {
  std::ostringstream os;
  switch (kind) {
    case TransformKind::kHorizontalFlip:
      os << "flip";
      break;
    case TransformKind::kTranslate:
      os << "translate(" << dx << "," << dy << ")";
      break;
    case TransformKind::kCropResize:
      os << "crop(" << window.xmin << "," << window.ymin << "," << window.xmax << ","
         << window.ymax << ")";
      break;
  }
  return os.str();
}

namespace {

// Visibility test against the frame region `region`, in source coordinates.
bool keeps_enough(const BBox& b, const BBox& region, double min_visible) {
  const double area = b.area();
  if (area <= 0.0) {
    // Degenerate boxes survive only while they touch the region.
    return b.xmin <= region.xmax && b.xmax >= region.xmin && b.ymin <= region.ymax &&
           b.ymax >= region.ymin;
  }
  const double visible = intersection_area(b, region);
  return visible > 0.0 && visible >= min_visible * area;
}

}  // namespace

std::optional<BBox> apply_transform(const GeomTransform& t, const BBox& b, double min_visible) {
  switch (t.kind) {
    case TransformKind::kHorizontalFlip:
      return BBox{1.0 - b.xmax, b.ymin, 1.0 - b.xmin, b.ymax};
    case TransformKind::kTranslate: {
      const BBox moved{b.xmin + t.dx, b.ymin + t.dy, b.xmax + t.dx, b.ymax + t.dy};
      if (!keeps_enough(moved, BBox{0.0, 0.0, 1.0, 1.0}, min_visible)) return std::nullopt;
      return clip_box(moved);
    }
    case TransformKind::kCropResize: {
      const BBox& w = t.window;
      if (!keeps_enough(b, w, min_visible)) return std::nullopt;
      const double sx = w.width();
      const double sy = w.height();
      const BBox mapped{(b.xmin - w.xmin) / sx, (b.ymin - w.ymin) / sy, (b.xmax - w.xmin) / sx,
                        (b.ymax - w.ymin) / sy};
      return clip_box(mapped);
    }
  }
  return std::nullopt;
}

std::optional<BBox> apply_transforms(const GeomRecord& record, const BBox& b,
                                     double min_visible) {
  std::optional<BBox> cur = b;
  for (const auto& t : record) {
    cur = apply_transform(t, *cur, min_visible);
    if (!cur) return std::nullopt;
  }
  return cur;
}

}  // namespace dcl
