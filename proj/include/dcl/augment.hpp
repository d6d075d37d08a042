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

#include <array>
#include <utility>
#include <vector>

#include "dcl/geometry.hpp"
#include "dcl/image.hpp"
#include "dcl/labels.hpp"
#include "dcl/rng.hpp"

namespace dcl {

// Augmentation policy A. Magnitudes are given at intensity 1 and scaled by the
// weak / strong intensity of each pipeline.
struct AugConfig {
  bool enabled = true;
  double weak_intensity = 1.0 / 3.0;
  double strong_intensity = 1.0;

  bool flip = true;
  bool translate = true;
  bool crop = true;
  bool color_jitter = true;
  bool erase = true;

  double flip_prob = 0.5;
  double max_translate = 0.15;  // fraction of frame
  double max_jitter = 0.25;     // channel gain / bias spread
  double min_crop_scale = 0.6;  // crop side fraction at intensity 1

  int erase_min_count = 1;
  int erase_max_count = 3;
  double erase_min_area = 0.05;  // fraction of frame area
  double erase_max_area = 0.15;

  double min_visible = kDefaultMinVisible;
  double crop_keep = 0.5;
  int crop_attempts = 20;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const AugConfig&) const = default;
};

struct ColorRecord {
  std::array<double, 3> gain{1.0, 1.0, 1.0};
  std::array<double, 3> bias{0.0, 0.0, 0.0};
};

// Pixel-space erase rectangle [x0, x1) x [y0, y1).
struct EraseRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct AugOutcome {
  Image image;
  GeomRecord geometry;
  ColorRecord color;
  std::vector<EraseRect> erased;
};

// Image-side counterparts of the geometric transforms in geometry.hpp.
Image flip_image(const Image& img);
// Shift by whole pixels; exposed area is filled with the per-channel mean.
Image translate_image(const Image& img, int shift_x, int shift_y);
Image crop_resize_image(const Image& img, const BBox& window);
Image apply_geometry(const Image& img, const GeomTransform& t);
void apply_color(Image& img, const ColorRecord& color);

// Maps labels through a geometric record, dropping boxes the transforms remove.
LabelSet map_labels(const GeomRecord& record, const LabelSet& labels,
                    double min_visible = kDefaultMinVisible);

// A_w: flip / translate / mild color jitter, never erase or crop.
AugOutcome weak_augment(const Image& img, const AugConfig& cfg, Rng& rng);

// A_s: box-aware crop-resize, one geometric op, color jitter, then erase.
std::pair<AugOutcome, LabelSet> strong_augment(const Image& img, const LabelSet& labels,
                                               const AugConfig& cfg, Rng& rng);

}  // namespace dcl
