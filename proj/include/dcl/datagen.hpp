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
#include <cstdint>
#include <string>
#include <vector>

#include "dcl/image.hpp"
#include "dcl/labels.hpp"
#include "dcl/rng.hpp"

namespace dcl {

struct Scene {
  int id = 0;
  Image image;
  LabelSet labels;
};

struct DatasetConfig {
  int height = 32;
  int width = 32;
  // P(object count = k) for k = 0 .. size()-1.
  std::vector<double> count_probs{0.1, 0.4, 0.3, 0.2};
  int num_classes = 2;
  // RGB fill per class; must have num_classes entries.
  std::vector<std::array<double, 3>> palette{{0.62, 0.36, 0.22}, {0.30, 0.36, 0.62}};
  double min_size = 0.2;  // object side, fraction of frame
  double max_size = 0.45;
  double clutter = 0.5;    // background texture and distractor strength in [0,1]
  double occlusion = 0.3;  // probability an object is crossed by an occluding bar
  int train_size = 2000;
  int val_size = 200;
  int test_size = 400;
  std::uint64_t seed = 7;

  int max_objects() const { return static_cast<int>(count_probs.size()) - 1; }
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const DatasetConfig&) const = default;
};

// An object to render; `box` is snapped to the pixel grid by the renderer.
struct ObjectSpec {
  BBox box;
  int class_id = 0;
  double shade = 1.0;  // brightness multiplier on the class colour
  bool occluded = false;
  double occluder_pos = 0.5;  // bar centre as a fraction of the object width
};

// Background only (texture, gradients and distractors), deterministic in rng.
Image render_background(const DatasetConfig& cfg, Rng& rng);
// Draws objects over a background; labels are the exact drawn extents.
Scene render_scene(int id, const Image& background, const std::vector<ObjectSpec>& objects,
                   const DatasetConfig& cfg, Rng& rng);
// Full random scene from its own stream.
Scene generate_scene(int id, const DatasetConfig& cfg, Rng rng);

// `count` scenes with per-scene streams split from (seed, split_tag).
std::vector<Scene> generate_dataset(const DatasetConfig& cfg, int count, std::uint64_t seed,
                                    std::uint64_t split_tag = 0);

struct Benchmark {
  std::vector<Scene> train;
  std::vector<Scene> val;
  std::vector<Scene> test;
};

// Train / val / test splits of the sizes given in cfg, seeded by cfg.seed.
Benchmark generate_benchmark(const DatasetConfig& cfg);

// Partially labelled data split of scene ids.
struct Split {
  std::vector<int> labelled;    // D_X, ascending
  std::vector<int> unlabelled;  // D_U, ascending
  double labelled_ratio = 1.0;
  std::uint64_t fold_seed = 0;
};

Split split_pld(const std::vector<Scene>& scenes, double labelled_ratio, std::uint64_t fold_seed);
Split split_pld(int num_scenes, double labelled_ratio, std::uint64_t fold_seed);

}  // namespace dcl
