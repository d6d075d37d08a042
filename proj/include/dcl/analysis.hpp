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
#include <string>
#include <vector>

#include "dcl/datagen.hpp"
#include "dcl/detector.hpp"
#include "dcl/engine.hpp"
#include "dcl/metrics.hpp"

namespace dcl {

// Teacher output on one scene, before any confidence threshold.
struct PseudoCandidates {
  int scene_id = 0;
  std::vector<Detection> dets;
  LabelSet gt;  // hidden ground truth, analysis only
};

std::vector<PseudoCandidates> collect_candidates(const ModelParams& teacher,
                                                 std::span<const Scene> scenes,
                                                 const EngineConfig& cfg);

// Keeps detections with score > sigma.
std::vector<std::vector<Detection>> filter_above(std::span<const PseudoCandidates> cands, double sigma);

struct QualityPoint {
  double precision50 = 0.0;
  double precision75 = 0.0;
  double recall50 = 0.0;
  double recall75 = 0.0;
};

QualityPoint pseudo_quality(std::span<const PseudoCandidates> cands, double sigma);

struct EpochAnalysis {
  int epoch = 0;
  QualityPoint unthresholded;
  std::vector<QualityPoint> sweep;  // one per grid value
  std::vector<double> fbeta;        // one per grid value
  ThresholdChoice best;
};

struct AnalysisResult {
  std::vector<double> grid;
  std::vector<EpochAnalysis> epochs;
  ArctanFit fit;
  bool has_fit = false;
  std::string scatter_csv;      // epoch,scene_id,class_id,score,iou
  std::string precision_csv;    // epoch,precision_iou50,precision_iou75
  std::string sweep_csv;        // sigma,precision_iou50,precision_iou75,recall_iou50,recall_iou75
  std::string heatmap_csv;      // epoch,sigma,fbeta,fbeta_normalised
  std::string best_csv;         // epoch,t_over_T,best_sigma,fbeta
  std::string fit_csv;          // start,end,steepness,sse
};

// Replays teacher checkpoints over scenes with hidden labels. beta weights
// precision over recall in the threshold search.
AnalysisResult analyze_checkpoints(std::span<const Checkpoint> checkpoints, int total_epochs,
                                   std::span<const Scene> scenes, const EngineConfig& cfg,
                                   double beta = 0.5);

// Best IoU of `box` against same-class boxes in `gt`, 0 when there is none.
double best_iou(const BBox& box, int class_id, const LabelSet& gt);

}  // namespace dcl
