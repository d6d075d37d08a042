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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcl/augment.hpp"
#include "dcl/datagen.hpp"
#include "dcl/detector.hpp"
#include "dcl/metrics.hpp"
#include "dcl/rng.hpp"
#include "dcl/schedules.hpp"

namespace dcl {

enum class InitMode { kWarmstart, kRandom };
enum class EmaMode { kEpoch, kIteration };
enum class EvalModel { kTeacher, kStudent };
enum class Regime { kVirtuous, kVicious, kIndeterminate };

std::string to_string(InitMode m);
std::string to_string(EmaMode m);
std::string to_string(EvalModel m);
std::string to_string(Regime r);
InitMode parse_init_mode(const std::string& s);
EmaMode parse_ema_mode(const std::string& s);
EvalModel parse_eval_model(const std::string& s);

struct EngineConfig {
  PolicyBundle policy;
  DetectorShape shape;
  LossConfig loss;
  AdamWConfig adamw;
  double lr = 3e-3;
  double lr_decay_at = 0.8;  // fraction of T after which lr is multiplied by lr_decay_factor
  double lr_decay_factor = 0.1;
  double no_object_bias = 1.0;
  int epochs = 300;
  int batch_size = 16;
  int unlabelled_ratio = 2;  // unlabelled draws per labelled sample, before π thinning
  InitMode init = InitMode::kWarmstart;
  double warmstart_frac = 0.25;  // supervised-only epochs before the loop, as a fraction of T
  EmaMode ema = EmaMode::kIteration;
  EvalModel eval_model = EvalModel::kStudent;
  int eval_every = 5;
  int checkpoint_every = 0;  // 0 keeps no intermediate checkpoints
  // Pseudo-label candidates: argmax-foreground queries only, or every query.
  bool pseudo_require_argmax = true;
  // Same-class IoU above which lower-scored teacher boxes are dropped; 1 disables.
  double pseudo_nms_iou = 0.5;
  int regime_window = 8;     // evaluated epochs
  double regime_threshold = 0.1;  // AP50 points per epoch

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const EngineConfig&) const = default;
};

struct StepLog {
  int epoch = 0;
  double sup_loss = 0.0;    // L
  double unsup_loss = 0.0;  // L'
  double total_loss = 0.0;  // L_all
  double alpha = 0.0;
  double sigma = 0.0;
  double pi = 0.0;
  double momentum = 0.0;
  double lr = 0.0;
  int labelled_seen = 0;
  int unlabelled_seen = 0;  // admitted by the sampling policy
  int pseudo_labels = 0;    // boxes that passed the threshold and the strong augmentation
  double pseudo_conf90 = 0.0;  // mean teacher detections per admitted image with ζ > 0.9
  double pseudo_conf50 = 0.0;
  bool evaluated = false;
  double val_ap50 = 0.0;  // points, valid when evaluated
  double val_map = 0.0;
  double val_conf90 = 0.0;  // mean teacher detections per validation image with ζ > 0.9
  double val_conf50 = 0.0;
  bool has_covariance = false;
  double covariance = 0.0;  // over the (L', p) history so far
  std::uint64_t teacher_checksum = 0;
};

struct TrainerState {
  ModelParams student;
  ModelParams teacher;
  OptimizerState optimizer;
  int epoch = 0;         // completed loop epochs
  int total_epochs = 0;  // T
  long iteration = 0;
  long pass = 0;  // epochs trained including warmstart, keys the per-epoch streams
  std::uint64_t seed = 0;
  std::vector<StepLog> history;
};

struct Checkpoint {
  int epoch = 0;
  ModelParams teacher;
  ModelParams student;
};

struct RunArtifacts {
  TrainerState state;
  std::vector<Checkpoint> checkpoints;
  MetricsRecord final_metrics;  // eval model on the evaluation split
  Regime regime = Regime::kIndeterminate;
};

// θ' ← m θ' + (1 − m) θ elementwise. Throws on shape mismatch or m outside (0,1).
ModelParams ema_update(const ModelParams& teacher, const ModelParams& student, double m);

// Order-sensitive FNV-1a digest of the parameter bits.
std::uint64_t checksum(const ModelParams& params);

struct PseudoSample {
  Image image;      // strongly augmented view of the weak view
  LabelSet labels;  // filtered pseudo-labels in the strong frame
  int conf90 = 0;   // teacher detections with ζ > 0.9 before filtering
  int conf50 = 0;
};

// Weak view → teacher → ζ > ς filter → strong view with boxes mapped along.
PseudoSample generate_pseudo_labels(const ModelParams& teacher, const Scene& scene,
                                    const PolicySnapshot& snap, Rng& rng,
                                    bool require_argmax = true, double nms_iou = 1.0);
// Same, with an externally supplied detector in place of the teacher. Every
// returned detection is a candidate.
PseudoSample generate_pseudo_labels(const std::function<std::vector<Detection>(const Image&)>& detect,
                                    const Scene& scene, const PolicySnapshot& snap, Rng& rng);

// New state with identical student and teacher.
TrainerState init_state(const EngineConfig& cfg, std::uint64_t seed);

// One pass over D_X. Unlabelled scenes must not carry labels the engine may
// use; only their images are read.
StepLog train_epoch(TrainerState& state, std::span<const Scene> labelled,
                    std::span<const Scene> unlabelled, const PolicySnapshot& snap,
                    const EngineConfig& cfg, double lr);

MetricsRecord evaluate(const ModelParams& params, std::span<const Scene> scenes);
// Mean count per image of foreground argmax predictions with ζ above `level`.
double mean_confident(const ModelParams& params, std::span<const Scene> scenes, double level);

double learning_rate(const EngineConfig& cfg, int epoch);

using EpochCallback = std::function<void(const StepLog&)>;

// Full loop: optional warmstart, T epochs, periodic validation. `val` is used
// for periodic evaluation and the final metrics.
RunArtifacts run_training(const EngineConfig& cfg, std::span<const Scene> labelled,
                          std::span<const Scene> unlabelled, std::span<const Scene> val,
                          std::uint64_t seed, const EpochCallback& on_epoch = {});

// OLS slope of ys against xs; 0 for fewer than two points or zero x spread.
double ols_slope(std::span<const double> xs, std::span<const double> ys);

Regime detect_cycle_regime(std::span<const StepLog> history, int window, double threshold = 0.1);

}  // namespace dcl
