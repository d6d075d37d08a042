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
#include <iosfwd>
#include <span>
#include <vector>

#include "dcl/geometry.hpp"
#include "dcl/hungarian.hpp"
#include "dcl/image.hpp"
#include "dcl/labels.hpp"
#include "dcl/rng.hpp"

namespace dcl {

// Pooled-feature two-layer perceptron with a fixed set of query heads.
struct DetectorShape {
  int pool = 8;  // P x P average-pooling grid per channel
  int channels = 3;
  int hidden = 64;
  int queries = 8;
  int classes = 2;  // foreground classes; index `classes` is no-object

  int input_dim() const { return pool * pool * channels; }
  int per_query() const { return classes + 1 + 4; }
  int output_dim() const { return queries * per_query(); }
  std::size_t param_count() const;
  bool operator==(const DetectorShape&) const = default;
};

// Flat parameter vector laid out as W1 (hidden x input), b1, W2 (output x hidden), b2.
struct ModelParams {
  DetectorShape shape;
  std::vector<double> values;

  static ModelParams zeros(const DetectorShape& shape);
  // Scaled Gaussian init; `no_object_bias` is added to every no-object logit.
  static ModelParams random(const DetectorShape& shape, Rng& rng, double no_object_bias = 0.0);

  bool consistent() const { return values.size() == shape.param_count(); }
  bool finite() const;
  bool operator==(const ModelParams&) const = default;
};

struct Prediction {
  std::vector<double> logits;  // C + 1, last is no-object
  std::vector<double> probs;
  std::array<double, 4> box_raw{};  // pre-sigmoid
  CenterBox box;

  static Prediction from_raw(std::span<const double> logits, std::span<const double> box_raw);
  // Hand-built prediction with the given box (inverse sigmoid is applied).
  static Prediction with_box(std::span<const double> logits, const CenterBox& box);

  int argmax() const;
  int foreground_class() const;
  double foreground_score() const;
  BBox corners() const { return clip_box(to_corners(box)); }
};

// Average pool to P x P per channel, shifted to be centred on 0.
std::vector<double> pool_features(const Image& img, const DetectorShape& shape);

struct ForwardCache {
  std::vector<double> features;
  std::vector<double> hidden;
  std::vector<double> outputs;
};

ForwardCache forward_cache(const ModelParams& params, const Image& img);
std::vector<Prediction> decode(const DetectorShape& shape, std::span<const double> outputs);
std::vector<Prediction> forward(const ModelParams& params, const Image& img);

struct LossConfig {
  double reg_weight = 5.0;
  double noobj_weight = 0.1;
  bool operator==(const LossConfig&) const = default;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d raw network outputs
  Assignment matching;       // (target, query) pairs
};

// Pairwise (target x query) matching cost: −log p(class) + reg_weight * L1.
CostMatrix matching_cost(std::span<const Prediction> preds, const LabelSet& targets,
                         const LossConfig& cfg);

// Hungarian-matched set loss averaged over queries. Throws when there are
// more targets than queries.
LossResult detection_loss(std::span<const Prediction> preds, const LabelSet& targets,
                          const LossConfig& cfg);

// Chain rule through the perceptron. The result has params.values.size() entries.
std::vector<double> backward(const ModelParams& params, const Image& img,
                             std::span<const double> grad_out);
// Accumulates scale * gradient into `grad` using a cached forward pass.
void accumulate_gradient(const ModelParams& params, const ForwardCache& cache,
                         std::span<const double> grad_out, double scale,
                         std::span<double> grad);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 4e-4;
  bool operator==(const AdamWConfig&) const = default;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// Decoupled weight decay followed by a bias-corrected Adam step.
void optimizer_step(ModelParams& params, std::span<const double> grad, double lr,
                    const AdamWConfig& cfg, OptimizerState& state);

// Queries whose argmax is a foreground class and whose score ζ >= floor.
std::vector<Detection> predict(const ModelParams& params, const Image& img, double floor);
std::vector<Detection> to_detections(std::span<const Prediction> preds, double floor);
// Greedy same-class suppression in descending score order (ties by index).
// A threshold >= 1 keeps everything.
std::vector<Detection> suppress_duplicates(std::vector<Detection> dets, double iou_thresh);
// Every query scored by its best foreground probability (evaluation ranking).
std::vector<Detection> rank_all_queries(std::span<const Prediction> preds);

// Text checkpoint: "dcl-params 1", shape line, count line, one value per line.
void save_params(std::ostream& out, const ModelParams& params);
ModelParams load_params(std::istream& in);

}  // namespace dcl
