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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dcl {

void DatasetConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("data." + field + ": " + why);
  };
  if (height <= 0 || width <= 0) fail("height", "image size must be positive");
  if (count_probs.empty()) fail("count_probs", "must list at least one probability");
  double total = 0.0;
  for (double p : count_probs) {
    if (!(p >= 0.0 && p <= 1.0)) fail("count_probs", "entries must lie in [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) fail("count_probs", "must sum to 1");
  if (num_classes <= 0) fail("num_classes", "must be positive");
  if (static_cast<int>(palette.size()) != num_classes) fail("palette", "needs one colour per class");
  if (!(min_size > 0.0 && min_size <= max_size && max_size <= 1.0)) {
    fail("min_size", "need 0 < min_size <= max_size <= 1");
  }
  if (!(clutter >= 0.0 && clutter <= 1.0)) fail("clutter", "must lie in [0,1]");
  if (!(occlusion >= 0.0 && occlusion <= 1.0)) fail("occlusion", "must lie in [0,1]");
  if (train_size <= 0) fail("train_size", "must be positive");
  if (val_size <= 0) fail("val_size", "must be positive");
  if (test_size <= 0) fail("test_size", "must be positive");
}

namespace {

constexpr std::array<double, 3> kGround{0.28, 0.42, 0.24};
constexpr std::array<double, 3> kBark{0.46, 0.32, 0.20};

struct PixelRect {
  int x0, y0, x1, y1;  // half-open
};

PixelRect snap(const BBox& b, const DatasetConfig& cfg) {
  PixelRect r{static_cast<int>(std::lround(b.xmin * cfg.width)),
              static_cast<int>(std::lround(b.ymin * cfg.height)),
              static_cast<int>(std::lround(b.xmax * cfg.width)),
              static_cast<int>(std::lround(b.ymax * cfg.height))};
  r.x0 = std::clamp(r.x0, 0, cfg.width);
  r.x1 = std::clamp(r.x1, r.x0, cfg.width);
  r.y0 = std::clamp(r.y0, 0, cfg.height);
  r.y1 = std::clamp(r.y1, r.y0, cfg.height);
  return r;
}

float unit(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

Image render_background(const DatasetConfig& cfg, Rng& rng) {
  Image img(cfg.height, cfg.width, 3);
  const double k = cfg.clutter;
  std::array<double, 3> base{};
  for (int c = 0; c < 3; ++c) base[c] = kGround[c] + k * rng.uniform(-0.08, 0.08);

  // Low-frequency texture.
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<Wave, 3> waves{};
  for (auto& w : waves) {
    w.fx = rng.uniform(0.5, 3.0);
    w.fy = rng.uniform(0.5, 3.0);
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    w.amp = k * rng.uniform(0.02, 0.07);
  }
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const double u = (x + 0.5) / cfg.width, v = (y + 0.5) / cfg.height;
      double tex = 0.0;
      for (const auto& w : waves) {
        tex += w.amp * std::sin(2.0 * std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
      }
      for (int c = 0; c < 3; ++c) {
        img.at(y, x, c) = unit(base[c] + tex + k * rng.uniform(-0.06, 0.06));
      }
    }
  }

  // Distractor trunks: thin bark-coloured vertical bars.
  const int trunks = rng.uniform_int(0, static_cast<int>(std::lround(3.0 * k)));
  for (int t = 0; t < trunks; ++t) {
    const int w = rng.uniform_int(1, std::max(1, cfg.width / 12));
    const int x0 = rng.uniform_int(0, cfg.width - w);
    const int y0 = rng.uniform_int(0, cfg.height / 3);
    const int y1 = rng.uniform_int(2 * cfg.height / 3, cfg.height);
    const double shade = rng.uniform(0.8, 1.2);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x0 + w; ++x)
        for (int c = 0; c < 3; ++c)
          img.at(y, x, c) = unit(kBark[c] * shade + k * rng.uniform(-0.04, 0.04));
  }
  return img;
}

Scene render_scene(int id, const Image& background, const std::vector<ObjectSpec>& objects,
                   const DatasetConfig& cfg, Rng& rng) {
  Scene s;
  s.id = id;
  s.image = background;
  for (const auto& obj : objects) {
    const PixelRect r = snap(obj.box, cfg);
    const int w = r.x1 - r.x0, h = r.y1 - r.y0;
    if (w <= 0 || h <= 0) continue;
    const auto& col = cfg.palette[static_cast<std::size_t>(obj.class_id)];
    const bool rounded = w >= 4 && h >= 4;
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) {
        const bool corner = (x == r.x0 || x == r.x1 - 1) && (y == r.y0 || y == r.y1 - 1);
        if (rounded && corner) continue;
        for (int c = 0; c < 3; ++c) {
          s.image.at(y, x, c) =
              unit(col[static_cast<std::size_t>(c)] * obj.shade + cfg.clutter * rng.uniform(-0.04, 0.04));
        }
      }
    }
    if (obj.occluded && w >= 5) {
      // Background shows through an interior bar; edge columns stay intact.
      const int bw = std::max(1, w / 6);
      const int lo = r.x0 + 1, hi = r.x1 - 1 - bw;
      const int bx = std::clamp(r.x0 + static_cast<int>(std::lround(obj.occluder_pos * w)) - bw / 2, lo, hi);
      for (int y = r.y0; y < r.y1; ++y)
        for (int x = bx; x < bx + bw; ++x)
          for (int c = 0; c < 3; ++c) s.image.at(y, x, c) = background.at(y, x, c);
    }
    s.labels.add(BBox{static_cast<double>(r.x0) / cfg.width, static_cast<double>(r.y0) / cfg.height,
                      static_cast<double>(r.x1) / cfg.width, static_cast<double>(r.y1) / cfg.height},
                 obj.class_id);
  }
  return s;
}

Scene generate_scene(int id, const DatasetConfig& cfg, Rng rng) {
  Rng bg_rng = rng.split(0);
  Rng layout_rng = rng.split(1);
  Rng paint_rng = rng.split(2);
  const Image background = render_background(cfg, bg_rng);

  const auto count = static_cast<int>(layout_rng.categorical(cfg.count_probs));
  std::vector<ObjectSpec> objects;
  std::vector<PixelRect> placed;
  for (int n = 0; n < count; ++n) {
    for (int attempt = 0; attempt < 50; ++attempt) {
      const int w = std::clamp(static_cast<int>(std::lround(layout_rng.uniform(cfg.min_size, cfg.max_size) * cfg.width)), 3, cfg.width);
      const int h = std::clamp(static_cast<int>(std::lround(layout_rng.uniform(cfg.min_size, cfg.max_size) * cfg.height)), 3, cfg.height);
      const int x0 = layout_rng.uniform_int(0, cfg.width - w);
      const int y0 = layout_rng.uniform_int(0, cfg.height - h);
      const PixelRect r{x0, y0, x0 + w, y0 + h};
      // Keep a one-pixel gap between objects.
      const bool clash = std::any_of(placed.begin(), placed.end(), [&](const PixelRect& o) {
        return r.x0 <= o.x1 && o.x0 <= r.x1 && r.y0 <= o.y1 && o.y0 <= r.y1;
      });
      if (clash) continue;
      placed.push_back(r);
      ObjectSpec obj;
      obj.box = {static_cast<double>(r.x0) / cfg.width, static_cast<double>(r.y0) / cfg.height,
                 static_cast<double>(r.x1) / cfg.width, static_cast<double>(r.y1) / cfg.height};
      obj.class_id = layout_rng.uniform_int(0, cfg.num_classes - 1);
      obj.shade = layout_rng.uniform(0.8, 1.2);
      obj.occluded = layout_rng.bernoulli(cfg.occlusion);
      obj.occluder_pos = layout_rng.uniform(0.25, 0.75);
      objects.push_back(obj);
      break;
    }
  }
  return render_scene(id, background, objects, cfg, paint_rng);
}

std::vector<Scene> generate_dataset(const DatasetConfig& cfg, int count, std::uint64_t seed,
                                    std::uint64_t split_tag) {
  cfg.validate();
  const Rng root(seed, split_tag);
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    scenes.push_back(generate_scene(i, cfg, root.split(static_cast<std::uint64_t>(i))));
  }
  return scenes;
}

Benchmark generate_benchmark(const DatasetConfig& cfg) {
  Benchmark b;
  b.train = generate_dataset(cfg, cfg.train_size, cfg.seed, 0);
  b.val = generate_dataset(cfg, cfg.val_size, cfg.seed, 1);
  b.test = generate_dataset(cfg, cfg.test_size, cfg.seed, 2);
  return b;
}

Split split_pld(int num_scenes, double labelled_ratio, std::uint64_t fold_seed) {
  if (!(labelled_ratio > 0.0 && labelled_ratio <= 1.0)) {
    throw std::invalid_argument("split_pld: labelled ratio must lie in (0,1]");
  }
  const int k = static_cast<int>(std::lround(labelled_ratio * num_scenes));
  if (num_scenes <= 0 || k <= 0) throw std::invalid_argument("split_pld: empty labelled set");
  std::vector<int> ids(static_cast<std::size_t>(num_scenes));
  for (int i = 0; i < num_scenes; ++i) ids[static_cast<std::size_t>(i)] = i;
  Rng rng(fold_seed, 0x5b1f);
  rng.shuffle(ids);
  Split s;
  s.labelled_ratio = labelled_ratio;
  s.fold_seed = fold_seed;
  s.labelled.assign(ids.begin(), ids.begin() + k);
  s.unlabelled.assign(ids.begin() + k, ids.end());
  std::sort(s.labelled.begin(), s.labelled.end());
  std::sort(s.unlabelled.begin(), s.unlabelled.end());
  return s;
}

Split split_pld(const std::vector<Scene>& scenes, double labelled_ratio, std::uint64_t fold_seed) {
  Split s = split_pld(static_cast<int>(scenes.size()), labelled_ratio, fold_seed);
  for (auto& i : s.labelled) i = scenes[static_cast<std::size_t>(i)].id;
  for (auto& i : s.unlabelled) i = scenes[static_cast<std::size_t>(i)].id;
  std::sort(s.labelled.begin(), s.labelled.end());
  std::sort(s.unlabelled.begin(), s.unlabelled.end());
  return s;
}

}  // namespace dcl
