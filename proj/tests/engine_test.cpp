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

#include "dcl/engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"

namespace dcl {
namespace {

struct TinyWorld {
  std::vector<Scene> labelled, unlabelled, val;
  EngineConfig cfg;
};

TinyWorld tiny_world(int epochs = 6) {
  DatasetConfig d;
  d.height = 16;
  d.width = 16;
  TinyWorld w;
  w.labelled = generate_dataset(d, 24, 3, 0);
  w.unlabelled = generate_dataset(d, 48, 3, 1);
  for (auto& s : w.unlabelled) s.labels = LabelSet{};
  w.val = generate_dataset(d, 16, 3, 2);
  w.cfg.shape.pool = 4;
  w.cfg.shape.hidden = 16;
  w.cfg.shape.queries = 4;
  w.cfg.batch_size = 8;
  w.cfg.epochs = epochs;
  w.cfg.eval_every = 2;
  return w;
}

ModelParams filled(const DetectorShape& s, double v) {
  ModelParams p = ModelParams::zeros(s);
  std::fill(p.values.begin(), p.values.end(), v);
  return p;
}

TEST(Ema, HalfMomentumAverages) {
  const DetectorShape s;
  const auto out = ema_update(filled(s, 0.0), filled(s, 1.0), 0.5);
  for (double v : out.values) EXPECT_EQ(v, 0.5);
}

TEST(Ema, MomentumNearOneKeepsTeacher) {
  Rng rng(1);
  const DetectorShape s;
  const ModelParams t = ModelParams::random(s, rng), st = ModelParams::random(s, rng);
  // 1 - 1e-18 rounds to 1.0 in double precision; use the largest double below 1.
  const auto out = ema_update(t, st, std::nextafter(1.0, 0.0));
  for (std::size_t i = 0; i < t.values.size(); ++i) EXPECT_NEAR(out.values[i], t.values[i], 1e-15);
}

TEST(Ema, GeometricConvergence) {
  const DetectorShape s;
  const double m = 0.9;
  ModelParams t = filled(s, 2.0);
  const ModelParams st = filled(s, -1.0);
  for (int k = 1; k <= 30; ++k) {
    t = ema_update(t, st, m);
    EXPECT_NEAR(std::abs(t.values[0] - st.values[0]), std::pow(m, k) * 3.0, 1e-12);
  }
}

TEST(Ema, Errors) {
  DetectorShape a, b;
  b.hidden = 8;
  EXPECT_THROW(ema_update(ModelParams::zeros(a), ModelParams::zeros(b), 0.5), std::invalid_argument);
  EXPECT_THROW(ema_update(ModelParams::zeros(a), ModelParams::zeros(a), 1.0), std::invalid_argument);
  EXPECT_THROW(ema_update(ModelParams::zeros(a), ModelParams::zeros(a), 0.0), std::invalid_argument);
}

TEST(EmaProperty, Contraction) {
  Rng rng(2);
  DetectorShape s;
  s.hidden = 4;
  for (int trial = 0; trial < 200; ++trial) {
    const ModelParams t = ModelParams::random(s, rng), st = ModelParams::random(s, rng);
    const double m = rng.uniform(0.01, 0.999);
    const auto out = ema_update(t, st, m);
    for (std::size_t i = 0; i < t.values.size(); ++i)
      EXPECT_LE(std::abs(out.values[i] - st.values[i]), m * std::abs(t.values[i] - st.values[i]) + 1e-15);
  }
}

TEST(Checksum, SensitiveToEveryValue) {
  Rng rng(3);
  const ModelParams p = ModelParams::random(DetectorShape{}, rng);
  ModelParams q = p;
  EXPECT_EQ(checksum(p), checksum(q));
  q.values.back() = std::nextafter(q.values.back(), 1.0);
  EXPECT_NE(checksum(p), checksum(q));
}

Scene two_object_scene() {
  DatasetConfig d;
  d.clutter = 0.0;
  Rng rng(4);
  const Image bg = render_background(d, rng);
  ObjectSpec a, b;
  a.box = {0.0625, 0.0625, 0.3125, 0.3125};
  b.box = {0.625, 0.625, 0.9375, 0.9375};
  b.class_id = 1;
  return render_scene(0, bg, {a, b}, d, rng);
}

PolicySnapshot identity_snapshot(double sigma) {
  PolicySnapshot snap;
  snap.sigma_t = sigma;
  snap.aug.enabled = false;
  return snap;
}

TEST(PseudoLabels, HighThresholdWeakTeacherGivesNothing) {
  const Scene s = two_object_scene();
  Rng rng(5), init(6);
  const ModelParams teacher = ModelParams::random(DetectorShape{}, init, 1.0);
  PolicySnapshot snap = identity_snapshot(0.99);
  snap.aug = AugConfig{};
  const auto ps = generate_pseudo_labels(teacher, s, snap, rng);
  EXPECT_TRUE(ps.labels.empty());
  EXPECT_EQ(ps.image.height, s.image.height);
}

TEST(PseudoLabels, OracleTeacherWithIdentityAugmentationsReturnsTruth) {
  const Scene s = two_object_scene();
  auto oracle = [&](const Image&) {
    std::vector<Detection> d;
    for (std::size_t i = 0; i < s.labels.size(); ++i) d.push_back({s.labels.boxes[i], s.labels.classes[i], 1.0});
    return d;
  };
  Rng rng(7);
  const auto ps = generate_pseudo_labels(oracle, s, identity_snapshot(0.5), rng);
  EXPECT_EQ(ps.labels, s.labels);
  EXPECT_EQ(ps.image, s.image);
  EXPECT_EQ(ps.conf90, 2);
}

TEST(PseudoLabels, OracleTeacherThroughCropsFollowsGeometry) {
  const Scene s = two_object_scene();
  PolicySnapshot snap;
  snap.sigma_t = 0.5;
  snap.aug.weak_intensity = 0.0;  // the weak view is the scene itself
  snap.aug.min_crop_scale = 0.3;
  auto oracle = [&](const Image&) {
    std::vector<Detection> d;
    for (std::size_t i = 0; i < s.labels.size(); ++i) d.push_back({s.labels.boxes[i], s.labels.classes[i], 1.0});
    return d;
  };
  int single_survivor = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    Rng rng(seed), replay(seed);
    const auto ps = generate_pseudo_labels(oracle, s, snap, rng);
    const auto weak = weak_augment(s.image, snap.aug, replay);
    const auto [strong, expected] = strong_augment(weak.image, s.labels, snap.aug, replay);
    ASSERT_EQ(ps.labels, expected);
    ASSERT_EQ(ps.labels, map_labels(strong.geometry, s.labels));
    const bool cropped = !strong.geometry.empty() && strong.geometry[0].kind == TransformKind::kCropResize;
    if (cropped && ps.labels.size() == 1) ++single_survivor;
  }
  EXPECT_GT(single_survivor, 0);
}

TEST(TrainEpoch, EmptyLabelledSetThrows) {
  auto w = tiny_world();
  TrainerState st = init_state(w.cfg, 1);
  EXPECT_THROW(train_epoch(st, {}, w.unlabelled, snapshot(w.cfg.policy, 1, 5), w.cfg, 1e-3),
               std::invalid_argument);
}

TEST(TrainEpoch, ZeroAlphaMatchesZeroSampling) {
  auto w = tiny_world();
  PolicySnapshot base = snapshot(w.cfg.policy, 3, 5);
  PolicySnapshot no_pi = base, no_alpha = base;
  no_pi.pi_t = 0.0;
  no_alpha.pi_t = 1.0;
  no_alpha.alpha_t = 0.0;
  TrainerState a = init_state(w.cfg, 9), b = init_state(w.cfg, 9);
  for (int e = 0; e < 2; ++e) {
    const StepLog la = train_epoch(a, w.labelled, w.unlabelled, no_pi, w.cfg, 1e-3);
    const StepLog lb = train_epoch(b, w.labelled, w.unlabelled, no_alpha, w.cfg, 1e-3);
    EXPECT_EQ(la.unlabelled_seen, 0);
    EXPECT_GT(lb.unlabelled_seen, 0);
    EXPECT_EQ(la.sup_loss, lb.sup_loss);
  }
  EXPECT_EQ(a.student, b.student);
  EXPECT_EQ(a.teacher, b.teacher);
}

TEST(TrainEpoch, PerfectFitOnlyDecays) {
  EngineConfig cfg;
  cfg.shape.pool = 4;
  cfg.shape.hidden = 4;
  cfg.shape.queries = 3;
  cfg.batch_size = 1;
  Scene s;
  s.image = Image(16, 16, 3, 0.3f);
  s.labels.add({0.25, 0.25, 0.75, 0.75}, 1);
  TrainerState st = init_state(cfg, 1);
  std::fill(st.student.values.begin(), st.student.values.end(), 0.0);
  // Hidden layer is zero, so the outputs are the output biases.
  const std::size_t b2 = st.student.values.size() - static_cast<std::size_t>(cfg.shape.output_dim());
  const auto per = static_cast<std::size_t>(cfg.shape.per_query());
  st.student.values[b2 + 1] = 60.0;  // query 0 predicts class 1 with box raw 0
  for (std::size_t q = 1; q < 3; ++q) st.student.values[b2 + q * per + 2] = 60.0;
  st.teacher = st.student;
  const ModelParams before = st.student;
  PolicySnapshot snap = identity_snapshot(0.5);
  snap.m_t = 0.99;
  const std::vector<Scene> lab{s};
  const StepLog log = train_epoch(st, lab, {}, snap, cfg, 1e-2);
  EXPECT_NEAR(log.sup_loss, 0.0, 1e-20);
  const double decay = 1.0 - 1e-2 * cfg.adamw.weight_decay;
  for (std::size_t i = 0; i < before.values.size(); ++i)
    EXPECT_NEAR(st.student.values[i], before.values[i] * decay, 1e-12);
}

TEST(TrainEpoch, LossCompositionAndTeacherContinuity) {
  auto w = tiny_world(8);
  std::uint64_t last = 0;
  bool first = true;
  const auto art = run_training(w.cfg, w.labelled, w.unlabelled, w.val, 5, [&](const StepLog& l) {
    EXPECT_NEAR(l.total_loss, l.sup_loss + l.alpha * l.unsup_loss, 1e-10);
    EXPECT_GE(l.sup_loss, 0.0);
    EXPECT_GE(l.unsup_loss, 0.0);
    EXPECT_TRUE(std::isfinite(l.total_loss));
    if (!first) EXPECT_NE(l.teacher_checksum, last);
    last = l.teacher_checksum;
    first = false;
  });
  EXPECT_EQ(checksum(art.state.teacher), last);
}

TEST(TrainEpoch, EpochEmaIsOneUpdatePerEpoch) {
  auto w = tiny_world();
  w.cfg.ema = EmaMode::kEpoch;
  TrainerState st = init_state(w.cfg, 2);
  const PolicySnapshot snap = snapshot(w.cfg.policy, 4, 5);
  const ModelParams teacher0 = st.teacher;
  train_epoch(st, w.labelled, w.unlabelled, snap, w.cfg, 1e-3);
  EXPECT_EQ(st.teacher, ema_update(teacher0, st.student, snap.m_t));
}

TEST(RunTraining, ZeroEpochsReturnsInitialState) {
  auto w = tiny_world(0);
  const auto art = run_training(w.cfg, w.labelled, w.unlabelled, w.val, 1);
  EXPECT_TRUE(art.state.history.empty());
  EXPECT_EQ(art.state.student, init_state(w.cfg, 1).student);
  EXPECT_EQ(art.regime, Regime::kIndeterminate);
}

TEST(RunTraining, Deterministic) {
  auto w = tiny_world();
  w.cfg.checkpoint_every = 3;
  const auto a = run_training(w.cfg, w.labelled, w.unlabelled, w.val, 4);
  const auto b = run_training(w.cfg, w.labelled, w.unlabelled, w.val, 4);
  ASSERT_EQ(a.state.history.size(), 6u);
  EXPECT_EQ(a.state.student, b.state.student);
  for (std::size_t i = 0; i < a.state.history.size(); ++i) {
    EXPECT_EQ(a.state.history[i].total_loss, b.state.history[i].total_loss);
    EXPECT_EQ(a.state.history[i].val_ap50, b.state.history[i].val_ap50);
  }
  EXPECT_EQ(a.checkpoints.size(), 2u);
  const auto c = run_training(w.cfg, w.labelled, w.unlabelled, w.val, 5);
  EXPECT_NE(a.state.student, c.state.student);
}

TEST(RunTraining, ZeroAlphaEqualsSupervisedBaseline) {
  auto w = tiny_world();
  EngineConfig sup = w.cfg, zero = w.cfg;
  sup.policy.pi = Schedule::constant(0.0);
  zero.policy.alpha = Schedule::constant(0.0);
  const auto a = run_training(sup, w.labelled, w.unlabelled, w.val, 6);
  const auto b = run_training(zero, w.labelled, w.unlabelled, w.val, 6);
  EXPECT_EQ(a.state.student, b.state.student);
  EXPECT_EQ(a.state.teacher, b.state.teacher);
}

TEST(RunTraining, EvaluatesOnSchedule) {
  auto w = tiny_world(5);
  const auto art = run_training(w.cfg, w.labelled, w.unlabelled, w.val, 1);
  std::vector<int> evaluated;
  for (const auto& h : art.state.history)
    if (h.evaluated) evaluated.push_back(h.epoch);
  EXPECT_EQ(evaluated, (std::vector<int>{2, 4, 5}));
  EXPECT_GE(art.final_metrics.AP50, 0.0);
}

TEST(RunTraining, RejectsInvalidConfig) {
  auto w = tiny_world();
  w.cfg.batch_size = 0;
  EXPECT_THROW(run_training(w.cfg, w.labelled, w.unlabelled, w.val, 1), std::invalid_argument);
  w = tiny_world();
  EXPECT_THROW(run_training(w.cfg, {}, w.unlabelled, w.val, 1), std::invalid_argument);
}

TEST(LearningRate, StepsDownLate) {
  EngineConfig cfg;
  cfg.epochs = 100;
  EXPECT_EQ(learning_rate(cfg, 79), cfg.lr);
  EXPECT_NEAR(learning_rate(cfg, 80), cfg.lr * cfg.lr_decay_factor, 1e-18);
}

std::vector<StepLog> synthetic_history(const std::vector<double>& ap, const std::vector<double>& conf) {
  std::vector<StepLog> h;
  for (std::size_t i = 0; i < ap.size(); ++i) {
    StepLog l;
    l.epoch = static_cast<int>(5 * (i + 1));
    l.evaluated = true;
    l.val_ap50 = ap[i];
    l.val_conf90 = conf[i];
    h.push_back(l);
    StepLog gap;
    gap.epoch = l.epoch + 1;
    h.push_back(gap);
  }
  return h;
}

TEST(Regime, RisingApAndCountsIsVirtuous) {
  const auto h = synthetic_history({10, 14, 18, 22, 26, 30}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  EXPECT_EQ(detect_cycle_regime(h, 4), Regime::kVirtuous);
}

TEST(Regime, DecayAfterPeakIsVicious) {
  const auto h = synthetic_history({10, 20, 30, 25, 18, 12, 7}, {0.1, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8});
  EXPECT_EQ(detect_cycle_regime(h, 4), Regime::kVicious);
}

TEST(Regime, FlatApIsIndeterminate) {
  const auto h = synthetic_history({20, 20, 20, 20, 20}, {0.1, 0.2, 0.3, 0.4, 0.5});
  EXPECT_EQ(detect_cycle_regime(h, 4), Regime::kIndeterminate);
}

TEST(Regime, ShortHistoryIsIndeterminate) {
  const auto h = synthetic_history({10, 20}, {0.1, 0.2});
  EXPECT_EQ(detect_cycle_regime(h, 4), Regime::kIndeterminate);
  EXPECT_THROW(detect_cycle_regime(h, 1), std::invalid_argument);
}

TEST(OlsSlope, Basics) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  EXPECT_NEAR(ols_slope(x, y), 2.0, 1e-15);
  EXPECT_EQ(ols_slope(std::vector<double>{1}, std::vector<double>{2}), 0.0);
  EXPECT_EQ(ols_slope(std::vector<double>{1, 1}, std::vector<double>{2, 3}), 0.0);
}

TEST(EngineConfig, EnumNamesRoundTrip) {
  EXPECT_EQ(parse_init_mode(to_string(InitMode::kRandom)), InitMode::kRandom);
  EXPECT_EQ(parse_ema_mode(to_string(EmaMode::kEpoch)), EmaMode::kEpoch);
  EXPECT_EQ(parse_eval_model(to_string(EvalModel::kStudent)), EvalModel::kStudent);
  EXPECT_THROW(parse_init_mode("pretrained"), std::invalid_argument);
}

}  // namespace
}  // namespace dcl
