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

#include <span>
#include <vector>

#include "dcl/hungarian.hpp"
#include "dcl/labels.hpp"

namespace dcl {

struct PRPoint {
  double precision = 1.0;
  double recall = 1.0;
};

// Outcome of greedy score-ordered matching for one scene.
struct MatchResult {
  std::vector<std::size_t> order;  // prediction indices by descending score
  std::vector<bool> pred_tp;       // indexed like the input predictions
  std::vector<bool> gt_matched;
  std::size_t true_positives() const;
  std::size_t false_positives() const { return pred_tp.size() - true_positives(); }
  std::size_t num_gt() const { return gt_matched.size(); }
};

// Predictions in descending score order (ties by input index), each matched to
// the highest-IoU unmatched same-class ground truth with IoU >= iou_thresh.
MatchResult match_at_iou(std::span<const Detection> preds, const LabelSet& gt, double iou_thresh);

// P = TP / (TP + FP), 1 with no predictions; R = TP / #GT, 1 with no GT.
PRPoint precision_recall(const MatchResult& m);
// Micro-averaged over several scenes.
PRPoint precision_recall(std::span<const MatchResult> ms);

// (1 + β²) P R / (β² P + R), 0 when the denominator vanishes.
double f_beta(const PRPoint& pr, double beta);

// A ranked detection outcome: true positive or not, sorted by descending score.
struct RankedHit {
  double score = 0.0;
  bool tp = false;
};

inline constexpr int kRecallPoints = 101;

// 101-point interpolated AP of a ranked list against `num_gt` ground truths.
double ap_from_ranked(std::vector<RankedHit> hits, std::size_t num_gt);

// Single-scene AP with same-class matching.
double average_precision(std::span<const Detection> preds, const LabelSet& gt, double iou_thresh);

struct MetricsRecord {
  double mAP = 0.0;   // mean over IoU 0.50:0.05:0.95 and classes
  double AP50 = 0.0;
  double AP75 = 0.0;
};

// COCO-style metrics over parallel per-scene lists. Classes without ground
// truth are left out of the class average. Throws on length mismatch.
MetricsRecord coco_metrics(std::span<const std::vector<Detection>> preds,
                           std::span<const LabelSet> gt, int num_classes);

// AP at a single IoU threshold, averaged over classes with ground truth.
double coco_ap_at(std::span<const std::vector<Detection>> preds, std::span<const LabelSet> gt,
                  int num_classes, double iou_thresh);

std::vector<double> default_threshold_grid();

struct ThresholdChoice {
  double threshold = 0.0;
  double fbeta = 0.0;
};

// Exhaustive F_β search over `grid` (ascending). Predictions are kept when
// score >= threshold. Ties go to the larger threshold; an empty prediction set
// yields (grid.back(), 0).
ThresholdChoice best_threshold(std::span<const std::vector<Detection>> preds,
                               std::span<const LabelSet> gt, double beta,
                               std::span<const double> grid, double iou_thresh = 0.5);

struct ArctanFit {
  double start = 0.0;
  double end = 0.0;
  double steepness = 1.0;
  double sse = 0.0;
};

struct SchedulePoint {
  double x = 0.0;  // t / T
  double y = 0.0;  // ς*_t
};

// Least-squares fit of start + (end − start) * arctan(κ x) / arctan(κ).
// Endpoints are solved in closed form per κ on a coarse grid, then κ is
// refined by golden-section search around the best grid cell.
ArctanFit fit_arctan_schedule(std::span<const SchedulePoint> points);

}  // namespace dcl
