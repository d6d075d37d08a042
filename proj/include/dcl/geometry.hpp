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

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dcl {

// Axis-aligned box in corner form, normalized frame coordinates.
struct BBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  // Ordered corners inside [0,1]. Zero area is allowed.
  bool valid() const;

  bool operator==(const BBox&) const = default;
};

// Center form (cx, cy, w, h) as produced by the detector head.
struct CenterBox {
  double cx = 0.5;
  double cy = 0.5;
  double w = 0.0;
  double h = 0.0;
};

// Corner conversion without clipping.
BBox to_corners(const CenterBox& c);
CenterBox to_center(const BBox& b);
BBox clip_box(const BBox& b);

double intersection_area(const BBox& a, const BBox& b);
// 0 when the union is empty, so degenerate boxes never match.
double iou(const BBox& a, const BBox& b);
double l1_distance(const BBox& a, const BBox& b);

enum class TransformKind { kHorizontalFlip, kTranslate, kCropResize };

struct GeomTransform {
  TransformKind kind = TransformKind::kTranslate;
  double dx = 0.0;  // translate only
  double dy = 0.0;
  BBox window{0.0, 0.0, 1.0, 1.0};  // crop-resize only

  static GeomTransform flip() { return {TransformKind::kHorizontalFlip, 0.0, 0.0, {}}; }
  static GeomTransform translate(double dx, double dy) {
    return {TransformKind::kTranslate, dx, dy, {}};
  }
  // Throws std::invalid_argument unless the window is a valid box with positive area.
  static GeomTransform crop(const BBox& window);

  std::string describe() const;
};

// Geometric transforms applied left to right.
using GeomRecord = std::vector<GeomTransform>;

inline constexpr double kDefaultMinVisible = 0.1;

// Maps a box into the transformed frame and re-clips it. Absent when less than
// `min_visible` of the original area survives (or nothing at all survives).
std::optional<BBox> apply_transform(const GeomTransform& t, const BBox& b,
                                    double min_visible = kDefaultMinVisible);
std::optional<BBox> apply_transforms(const GeomRecord& record, const BBox& b,
                                     double min_visible = kDefaultMinVisible);

}  // namespace dcl
