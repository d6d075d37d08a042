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

#include "dcl/analysis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcl {
namespace {

struct QuerySpec {
  int class_id;  // 2 = no-object
  double score;  // probability given to class_id
  BBox box;
};

// A teacher whose hidden layer is zero, so every image gets the same queries.
ModelParams constant_teacher(const DetectorShape& shape, const std::vector<QuerySpec>& queries) {
  ModelParams p = ModelParams::zeros(shape);
  const std::size_t b2 = p.values.size() - static_cast<std::size_t>(shape.output_dim());
  const auto per = static_cast<std::size_t>(shape.per_query());
  for (std::size_t q = 0; q < static_cast<std::size_t>(shape.queries); ++q) {
    double* out = p.values.data() + b2 + q * per;
    QuerySpec spec = q < queries.size() ? queries[q] : QuerySpec{2, 0.99, {0.4, 0.4, 0.6, 0.6}};
    // Softmax over 3 logits: the chosen class gets `score`, the others split the rest.
    const double rest = (1.0 - spec.score) / 2.0;
    for (int k = 0; k < 3; ++k) out[k] = std::log(k == spec.class_id ? spec.score : rest);
    const CenterBox c = to_center(spec.box);
    const double v[4] = {c.cx, c.cy, c.w, c.h};
    for (int i = 0; i < 4; ++i) out[3 + i] = std::log(v[i] / (1.0 - v[i]));
  }
  return p;
}

DetectorShape shape() {
  DetectorShape s;
  s.pool = 4;
  s.hidden = 4;
  s.queries = 5;
  return s;
}

Scene fixed_scene(int id) {
  Scene s;
  s.id = id;
  s.image = Image(16, 16, 3, 0.4f);
  s.labels.add({0.125, 0.125, 0.5, 0.5}, 0);
  s.labels.add({0.5625, 0.5, 0.9375, 0.875}, 1);
  return s;
}

TEST(Analysis, OracleTeacherHasPerfectPrecisionAtEveryThreshold) {
  const std::vector<Scene> scenes{fixed_scene(0), fixed_scene(1)};
  const ModelParams oracle =
      constant_teacher(shape(), {{0, 0.97, scenes[0].labels.boxes[0]}, {1, 0.97, scenes[0].labels.boxes[1]}});
  const std::vector<Checkpoint> ckpts{{10, oracle, oracle}, {20, oracle, oracle}, {30, oracle, oracle}};
  const auto res = analyze_checkpoints(ckpts, 30, scenes, EngineConfig{});
  ASSERT_EQ(res.epochs.size(), 3u);
  for (const auto& e : res.epochs) {
    EXPECT_DOUBLE_EQ(e.unthresholded.precision50, 1.0);
    EXPECT_DOUBLE_EQ(e.unthresholded.recall50, 1.0);
    for (const auto& q : e.sweep) {
      EXPECT_DOUBLE_EQ(q.precision50, 1.0);
      EXPECT_DOUBLE_EQ(q.precision75, 1.0);
    }
  }
  EXPECT_TRUE(res.has_fit);
}

TEST(Analysis, UntrainedTeacherHasNoRecallAtHighThreshold) {
  DatasetConfig d;
  d.height = 16;
  d.width = 16;
  const auto scenes = generate_dataset(d, 40, 4);
  Rng rng(5);
  EngineConfig cfg;
  cfg.shape = shape();
  const ModelParams teacher = ModelParams::random(cfg.shape, rng, 1.0);
  const auto cands = collect_candidates(teacher, scenes, cfg);
  EXPECT_LE(pseudo_quality(cands, 0.9).recall50, 0.01);
  // Filter monotonicity: recall never rises with the threshold.
  double prev = 2.0;
  for (double s : default_threshold_grid()) {
    const double r = pseudo_quality(cands, s).recall50;
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Analysis, BestThresholdRisesWithTeacherConfidence) {
  const std::vector<Scene> scenes{fixed_scene(0)};
  const auto& gt = scenes[0].labels;
  std::vector<Checkpoint> ckpts;
  const std::vector<double> tp_scores{0.42, 0.55, 0.68, 0.81, 0.93};
  for (std::size_t e = 0; e < tp_scores.size(); ++e) {
    // Two correct boxes and one confident false positive that stays below them.
    const ModelParams t = constant_teacher(
        shape(), {{0, tp_scores[e], gt.boxes[0]}, {1, tp_scores[e], gt.boxes[1]},
                  {0, tp_scores[e] - 0.2, {0.6, 0.05, 0.9, 0.3}}});
    ckpts.push_back({static_cast<int>(10 * (e + 1)), t, t});
  }
  const EngineConfig cfg;
  const auto res = analyze_checkpoints(ckpts, 50, scenes, cfg);
  double prev = 0.0;
  for (std::size_t e = 0; e < res.epochs.size(); ++e) {
    const auto cands = collect_candidates(ckpts[e].teacher, scenes, cfg);
    std::vector<std::vector<Detection>> dets{cands[0].dets};
    const std::vector<LabelSet> gts{gt};
    const auto oracle = best_threshold(dets, gts, 0.5, res.grid);
    EXPECT_EQ(res.epochs[e].best.threshold, oracle.threshold);
    EXPECT_EQ(res.epochs[e].best.fbeta, oracle.fbeta);
    EXPECT_GE(res.epochs[e].best.threshold, prev);
    prev = res.epochs[e].best.threshold;
  }
}

TEST(Analysis, CsvShapes) {
  const std::vector<Scene> scenes{fixed_scene(0)};
  const ModelParams t = constant_teacher(shape(), {{0, 0.83, scenes[0].labels.boxes[0]}});
  const std::vector<Checkpoint> ckpts{{5, t, t}};
  const auto res = analyze_checkpoints(ckpts, 10, scenes, EngineConfig{});
  EXPECT_EQ(res.best_csv, "epoch,t_over_T,best_sigma,fbeta\n5,0.5,0.8,0.8333333333\n");
  EXPECT_FALSE(res.has_fit);
  EXPECT_EQ(res.fit_csv, "start,end,steepness,sse\n");
  EXPECT_EQ(std::count(res.heatmap_csv.begin(), res.heatmap_csv.end(), '\n'), 1 + 19);
  // Rerunning is a pure function of the inputs.
  EXPECT_EQ(analyze_checkpoints(ckpts, 10, scenes, EngineConfig{}).scatter_csv, res.scatter_csv);
}

TEST(Analysis, Errors) {
  const std::vector<Scene> scenes{fixed_scene(0)};
  EXPECT_THROW(analyze_checkpoints({}, 10, scenes, EngineConfig{}), std::invalid_argument);
}

TEST(Analysis, BestIouIsClassAware) {
  LabelSet gt;
  gt.add({0, 0, 0.5, 0.5}, 1);
  EXPECT_EQ(best_iou({0, 0, 0.5, 0.5}, 0, gt), 0.0);
  EXPECT_DOUBLE_EQ(best_iou({0, 0, 0.5, 0.5}, 1, gt), 1.0);
}

}  // namespace
}  // namespace dcl
