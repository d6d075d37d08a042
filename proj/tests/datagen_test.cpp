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

#include "dcl/datagen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dcl {
namespace {

struct PixelBox {
  int x0 = 1 << 20, y0 = 1 << 20, x1 = -1, y1 = -1;
  bool empty() const { return x1 < 0; }
};

// Bounding box of pixels that differ from the background inside `region`
// grown by one pixel.
PixelBox scan_object(const Image& img, const Image& bg, const BBox& region) {
  PixelBox pb;
  const int x0 = std::max(0, static_cast<int>(std::lround(region.xmin * img.width)) - 1);
  const int x1 = std::min(img.width, static_cast<int>(std::lround(region.xmax * img.width)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::lround(region.ymin * img.height)) - 1);
  const int y1 = std::min(img.height, static_cast<int>(std::lround(region.ymax * img.height)) + 1);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      bool differs = false;
      for (int c = 0; c < 3; ++c) differs |= img.at(y, x, c) != bg.at(y, x, c);
      if (!differs) continue;
      pb.x0 = std::min(pb.x0, x);
      pb.y0 = std::min(pb.y0, y);
      pb.x1 = std::max(pb.x1, x + 1);
      pb.y1 = std::max(pb.y1, y + 1);
    }
  return pb;
}

TEST(DatasetConfig, Validation) {
  DatasetConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.count_probs = {0.5, 0.6};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = DatasetConfig{};
  cfg.palette.pop_back();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = DatasetConfig{};
  cfg.height = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = DatasetConfig{};
  cfg.occlusion = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Datagen, CleanObjectLabelIsRenderedExtent) {
  DatasetConfig cfg;
  cfg.clutter = 0.0;
  Rng rng(1);
  const Image bg = render_background(cfg, rng);
  ObjectSpec obj;
  obj.box = {0.25, 0.125, 0.625, 0.5};  // whole pixels at 32 x 32
  obj.class_id = 1;
  const Scene s = render_scene(3, bg, {obj}, cfg, rng);
  ASSERT_EQ(s.labels.size(), 1u);
  EXPECT_EQ(s.labels.boxes[0], obj.box);
  EXPECT_EQ(s.labels.classes[0], 1);
  const PixelBox pb = scan_object(s.image, bg, obj.box);
  EXPECT_EQ(pb.x0, 8);
  EXPECT_EQ(pb.x1, 20);
  EXPECT_EQ(pb.y0, 4);
  EXPECT_EQ(pb.y1, 16);
}

TEST(Datagen, SameSeedSameDataset) {
  DatasetConfig cfg;
  const auto a = generate_dataset(cfg, 20, 5);
  const auto b = generate_dataset(cfg, 20, 5);
  const auto c = generate_dataset(cfg, 20, 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].labels, b[i].labels);
  }
  EXPECT_NE(a[0].image, c[0].image);
}

TEST(Datagen, ScenesAreIndependentOfDatasetSize) {
  DatasetConfig cfg;
  const auto small = generate_dataset(cfg, 5, 9);
  const auto large = generate_dataset(cfg, 40, 9);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].image, large[i].image);
}

TEST(Datagen, ObjectCountFrequencies) {
  DatasetConfig cfg;
  cfg.height = 16;
  cfg.width = 16;
  cfg.count_probs = {0.2, 0.5, 0.3};
  cfg.min_size = 0.1;
  cfg.max_size = 0.2;
  const int n = 10000;
  const auto scenes = generate_dataset(cfg, n, 11);
  std::vector<int> counts(3, 0);
  for (const auto& s : scenes) ++counts[s.labels.size()];
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = cfg.count_probs[k];
    const double se = std::sqrt(p * (1.0 - p) / n);
    EXPECT_NEAR(counts[k] / static_cast<double>(n), p, 3.0 * se) << "count " << k;
  }
}

TEST(DatagenProperty, PixelScanRecoversLabels) {
  DatasetConfig cfg;
  cfg.occlusion = 0.5;
  const std::uint64_t seed = 21;
  const Rng root(seed, 0);
  const auto scenes = generate_dataset(cfg, 300, seed);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    // Re-render the background from the scene's own stream.
    Rng bg_rng = root.split(i).split(0);
    const Image bg = render_background(cfg, bg_rng);
    const Scene& s = scenes[i];
    ASSERT_LE(static_cast<int>(s.labels.size()), cfg.max_objects());
    for (std::size_t k = 0; k < s.labels.size(); ++k) {
      const BBox& b = s.labels.boxes[k];
      EXPECT_TRUE(b.valid());
      const PixelBox pb = scan_object(s.image, bg, b);
      ASSERT_FALSE(pb.empty());
      EXPECT_LE(std::abs(pb.x0 - b.xmin * cfg.width), 1.0);
      EXPECT_LE(std::abs(pb.x1 - b.xmax * cfg.width), 1.0);
      EXPECT_LE(std::abs(pb.y0 - b.ymin * cfg.height), 1.0);
      EXPECT_LE(std::abs(pb.y1 - b.ymax * cfg.height), 1.0);
    }
    for (float v : s.image.data) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

TEST(Datagen, OccluderShowsBackground) {
  DatasetConfig cfg;
  cfg.clutter = 0.0;
  Rng rng(2);
  const Image bg = render_background(cfg, rng);
  ObjectSpec obj;
  obj.box = {0.25, 0.25, 0.75, 0.75};
  obj.occluded = true;
  const Scene s = render_scene(0, bg, {obj}, cfg, rng);
  int bg_columns = 0;
  for (int x = 8; x < 24; ++x) bg_columns += s.image.at(16, x, 0) == bg.at(16, x, 0);
  EXPECT_GT(bg_columns, 0);
  EXPECT_NE(s.image.at(16, 8, 0), bg.at(16, 8, 0));
  EXPECT_NE(s.image.at(16, 23, 0), bg.at(16, 23, 0));
}

TEST(Benchmark, SplitsUseDistinctStreams) {
  DatasetConfig cfg;
  cfg.train_size = 4;
  cfg.val_size = 4;
  cfg.test_size = 4;
  const auto b = generate_benchmark(cfg);
  EXPECT_EQ(b.train.size(), 4u);
  EXPECT_NE(b.train[0].image, b.val[0].image);
  EXPECT_NE(b.val[0].image, b.test[0].image);
}

TEST(SplitPld, FullRatio) {
  const Split s = split_pld(30, 1.0, 4);
  EXPECT_EQ(s.labelled.size(), 30u);
  EXPECT_TRUE(s.unlabelled.empty());
}

TEST(SplitPld, HalfOfHundred) {
  const Split s = split_pld(100, 0.5, 4);
  EXPECT_EQ(s.labelled.size(), 50u);
  EXPECT_EQ(s.unlabelled.size(), 50u);
}

TEST(SplitPld, Errors) {
  EXPECT_THROW(split_pld(100, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(split_pld(100, 1.5, 1), std::invalid_argument);
  EXPECT_THROW(split_pld(3, 0.1, 1), std::invalid_argument);
}

TEST(SplitPldProperty, DisjointReproducibleAndRatio) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 50 + static_cast<int>(seed) * 7;
    const double ratio = 0.1 + 0.015 * static_cast<double>(seed);
    const Split s = split_pld(n, ratio, seed);
    EXPECT_EQ(s.labelled, split_pld(n, ratio, seed).labelled);
    std::set<int> all(s.labelled.begin(), s.labelled.end());
    for (int u : s.unlabelled) EXPECT_EQ(all.count(u), 0u);
    all.insert(s.unlabelled.begin(), s.unlabelled.end());
    EXPECT_EQ(static_cast<int>(all.size()), n);
    EXPECT_LE(std::abs(static_cast<double>(s.labelled.size()) - ratio * n), 0.5);
  }
}

TEST(SplitPldProperty, FoldOverlapNearHypergeometricMean) {
  const int n = 1000, k = 100;
  const double mean = static_cast<double>(k) * k / n;
  const double var = mean * (1.0 - static_cast<double>(k) / n) * (n - k) / (n - 1.0);
  const int pairs = 60;
  double total = 0.0;
  for (int f = 0; f < pairs; ++f) {
    const Split a = split_pld(n, 0.1, static_cast<std::uint64_t>(2 * f));
    const Split b = split_pld(n, 0.1, static_cast<std::uint64_t>(2 * f + 1));
    EXPECT_NE(a.labelled, b.labelled);
    std::vector<int> common;
    std::set_intersection(a.labelled.begin(), a.labelled.end(), b.labelled.begin(), b.labelled.end(),
                          std::back_inserter(common));
    total += static_cast<double>(common.size());
  }
  EXPECT_NEAR(total / pairs, mean, 3.0 * std::sqrt(var / pairs));
}

TEST(SplitPld, SceneOverloadMapsIds) {
  DatasetConfig cfg;
  auto scenes = generate_dataset(cfg, 10, 3);
  for (auto& s : scenes) s.id += 100;
  const Split s = split_pld(scenes, 0.3, 8);
  ASSERT_EQ(s.labelled.size(), 3u);
  for (int id : s.labelled) EXPECT_GE(id, 100);
}

}  // namespace
}  // namespace dcl
