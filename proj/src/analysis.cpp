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

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace dcl {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double best_iou(const BBox& box, int class_id, const LabelSet& gt) {
  double best = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.classes[i] == class_id) best = std::max(best, iou(box, gt.boxes[i]));
  }
  return best;
}

std::vector<PseudoCandidates> collect_candidates(const ModelParams& teacher,
                                                 std::span<const Scene> scenes,
                                                 const EngineConfig& cfg) {
  std::vector<PseudoCandidates> out;
  out.reserve(scenes.size());
  for (const auto& s : scenes) {
    const auto preds = forward(teacher, s.image);
    auto dets = cfg.pseudo_require_argmax ? to_detections(preds, 0.0) : rank_all_queries(preds);
    out.push_back({s.id, suppress_duplicates(std::move(dets), cfg.pseudo_nms_iou), s.labels});
  }
  return out;
}

std::vector<std::vector<Detection>> filter_above(std::span<const PseudoCandidates> cands, double sigma) {
  std::vector<std::vector<Detection>> out;
  out.reserve(cands.size());
  for (const auto& c : cands) {
    std::vector<Detection> kept;
    for (const auto& d : c.dets) {
      if (d.score > sigma) kept.push_back(d);
    }
    out.push_back(std::move(kept));
  }
  return out;
}

QualityPoint pseudo_quality(std::span<const PseudoCandidates> cands, double sigma) {
  const auto kept = filter_above(cands, sigma);
  std::vector<MatchResult> m50, m75;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    m50.push_back(match_at_iou(kept[i], cands[i].gt, 0.5));
    m75.push_back(match_at_iou(kept[i], cands[i].gt, 0.75));
  }
  const PRPoint a = precision_recall(m50);
  const PRPoint b = precision_recall(m75);
  return {a.precision, b.precision, a.recall, b.recall};
}

AnalysisResult analyze_checkpoints(std::span<const Checkpoint> checkpoints, int total_epochs,
                                   std::span<const Scene> scenes, const EngineConfig& cfg,
                                   double beta) {
  if (checkpoints.empty()) throw std::invalid_argument("analysis: no checkpoints to replay");
  if (total_epochs <= 0) throw std::invalid_argument("analysis: total epochs must be positive");
  AnalysisResult res;
  res.grid = default_threshold_grid();
  res.scatter_csv = "epoch,scene_id,class_id,score,iou\n";
  res.precision_csv = "epoch,precision_iou50,precision_iou75\n";
  res.heatmap_csv = "epoch,sigma,fbeta,fbeta_normalised\n";
  res.best_csv = "epoch,t_over_T,best_sigma,fbeta\n";

  std::vector<QualityPoint> mean_sweep(res.grid.size());
  std::vector<SchedulePoint> points;
  for (const auto& ck : checkpoints) {
    const auto cands = collect_candidates(ck.teacher, scenes, cfg);
    EpochAnalysis ea;
    ea.epoch = ck.epoch;
    for (const auto& c : cands) {
      for (const auto& d : c.dets) {
        res.scatter_csv += std::to_string(ck.epoch) + "," + std::to_string(c.scene_id) + "," +
                           std::to_string(d.class_id) + "," + num(d.score) + "," +
                           num(best_iou(d.box, d.class_id, c.gt)) + "\n";
      }
    }
    ea.unthresholded = pseudo_quality(cands, -1.0);
    res.precision_csv += std::to_string(ck.epoch) + "," + num(ea.unthresholded.precision50) + "," +
                         num(ea.unthresholded.precision75) + "\n";

    double max_f = 0.0;
    for (std::size_t g = 0; g < res.grid.size(); ++g) {
      const QualityPoint q = pseudo_quality(cands, res.grid[g]);
      ea.sweep.push_back(q);
      ea.fbeta.push_back(f_beta({q.precision50, q.recall50}, beta));
      max_f = std::max(max_f, ea.fbeta.back());
      mean_sweep[g].precision50 += q.precision50;
      mean_sweep[g].precision75 += q.precision75;
      mean_sweep[g].recall50 += q.recall50;
      mean_sweep[g].recall75 += q.recall75;
    }
    for (std::size_t g = 0; g < res.grid.size(); ++g) {
      res.heatmap_csv += std::to_string(ck.epoch) + "," + num(res.grid[g]) + "," + num(ea.fbeta[g]) + "," +
                         num(max_f > 0.0 ? ea.fbeta[g] / max_f : 0.0) + "\n";
    }

    std::vector<std::vector<Detection>> all;
    std::vector<LabelSet> gts;
    for (const auto& c : cands) {
      all.push_back(c.dets);
      gts.push_back(c.gt);
    }
    ea.best = best_threshold(all, gts, beta, res.grid, 0.5);
    const double x = static_cast<double>(ck.epoch) / total_epochs;
    res.best_csv += std::to_string(ck.epoch) + "," + num(x) + "," + num(ea.best.threshold) + "," +
                    num(ea.best.fbeta) + "\n";
    points.push_back({x, ea.best.threshold});
    res.epochs.push_back(std::move(ea));
  }

  res.sweep_csv = "sigma,precision_iou50,precision_iou75,recall_iou50,recall_iou75\n";
  const double n = static_cast<double>(checkpoints.size());
  for (std::size_t g = 0; g < res.grid.size(); ++g) {
    res.sweep_csv += num(res.grid[g]) + "," + num(mean_sweep[g].precision50 / n) + "," +
                     num(mean_sweep[g].precision75 / n) + "," + num(mean_sweep[g].recall50 / n) + "," +
                     num(mean_sweep[g].recall75 / n) + "\n";
  }
  res.fit_csv = "start,end,steepness,sse\n";
  if (points.size() >= 3) {
    res.fit = fit_arctan_schedule(points);
    res.has_fit = true;
    res.fit_csv += num(res.fit.start) + "," + num(res.fit.end) + "," + num(res.fit.steepness) + "," +
                   num(res.fit.sse) + "\n";
  }
  return res;
}

}  // namespace dcl
