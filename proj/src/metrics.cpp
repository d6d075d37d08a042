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

#include "dcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dcl/schedules.hpp"

namespace dcl {

std::size_t MatchResult::true_positives() const {
  return static_cast<std::size_t>(std::count(pred_tp.begin(), pred_tp.end(), true));
}

MatchResult match_at_iou(std::span<const Detection> preds, const LabelSet& gt, double iou_thresh) {
  MatchResult m;
  m.order.resize(preds.size());
  std::iota(m.order.begin(), m.order.end(), std::size_t{0});
  std::stable_sort(m.order.begin(), m.order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
  m.pred_tp.assign(preds.size(), false);
  m.gt_matched.assign(gt.size(), false);
  for (std::size_t idx : m.order) {
    const Detection& d = preds[idx];
    double best = iou_thresh;
    std::ptrdiff_t best_gt = -1;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (m.gt_matched[g] || gt.classes[g] != d.class_id) continue;
      const double v = iou(d.box, gt.boxes[g]);
      if (v >= best && (best_gt < 0 || v > best)) {
        best = v;
        best_gt = static_cast<std::ptrdiff_t>(g);
      }
    }
    if (best_gt >= 0) {
      m.gt_matched[static_cast<std::size_t>(best_gt)] = true;
      m.pred_tp[idx] = true;
    }
  }
  return m;
}

namespace {

PRPoint pr_from_counts(std::size_t tp, std::size_t npred, std::size_t ngt) {
  PRPoint pr;
  pr.precision = npred == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(npred);
  pr.recall = ngt == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(ngt);
  return pr;
}

}  // namespace

PRPoint precision_recall(const MatchResult& m) {
  return pr_from_counts(m.true_positives(), m.pred_tp.size(), m.num_gt());
}

PRPoint precision_recall(std::span<const MatchResult> ms) {
  std::size_t tp = 0, npred = 0, ngt = 0;
  for (const auto& m : ms) {
    tp += m.true_positives();
    npred += m.pred_tp.size();
    ngt += m.num_gt();
  }
  return pr_from_counts(tp, npred, ngt);
}

double f_beta(const PRPoint& pr, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("f_beta: beta must be positive");
  const double b2 = beta * beta;
  const double denom = b2 * pr.precision + pr.recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * pr.precision * pr.recall / denom;
}

double ap_from_ranked(std::vector<RankedHit> hits, std::size_t num_gt) {
  if (num_gt == 0) return 0.0;
  std::stable_sort(hits.begin(), hits.end(),
                   [](const RankedHit& a, const RankedHit& b) { return a.score > b.score; });
  const std::size_t n = hits.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (hits[k].tp) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  // Monotone envelope.
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double sum = 0.0;
  for (int i = 0; i < kRecallPoints; ++i) {
    const double r = i / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

double average_precision(std::span<const Detection> preds, const LabelSet& gt, double iou_thresh) {
  const MatchResult m = match_at_iou(preds, gt, iou_thresh);
  std::vector<RankedHit> hits;
  hits.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) hits.push_back({preds[i].score, m.pred_tp[i]});
  return ap_from_ranked(std::move(hits), gt.size());
}

double coco_ap_at(std::span<const std::vector<Detection>> preds, std::span<const LabelSet> gt,
                  int num_classes, double iou_thresh) {
  if (preds.size() != gt.size()) {
    throw std::invalid_argument("coco_metrics: prediction and ground-truth scene counts differ");
  }
  std::vector<std::vector<RankedHit>> hits(static_cast<std::size_t>(num_classes));
  std::vector<std::size_t> ngt(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t s = 0; s < preds.size(); ++s) {
    const MatchResult m = match_at_iou(preds[s], gt[s], iou_thresh);
    for (std::size_t i = 0; i < preds[s].size(); ++i) {
      const int c = preds[s][i].class_id;
      if (c >= 0 && c < num_classes) {
        hits[static_cast<std::size_t>(c)].push_back({preds[s][i].score, m.pred_tp[i]});
      }
    }
    for (int c : gt[s].classes) {
      if (c >= 0 && c < num_classes) ++ngt[static_cast<std::size_t>(c)];
    }
  }
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < num_classes; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    if (ngt[ci] == 0) continue;
    sum += ap_from_ranked(std::move(hits[ci]), ngt[ci]);
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

MetricsRecord coco_metrics(std::span<const std::vector<Detection>> preds,
                           std::span<const LabelSet> gt, int num_classes) {
  MetricsRecord rec;
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double thr = 0.5 + 0.05 * i;
    const double ap = coco_ap_at(preds, gt, num_classes, thr);
    sum += ap;
    if (i == 0) rec.AP50 = ap;
    if (i == 5) rec.AP75 = ap;
  }
  rec.mAP = sum / 10.0;
  return rec;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

ThresholdChoice best_threshold(std::span<const std::vector<Detection>> preds,
                               std::span<const LabelSet> gt, double beta,
                               std::span<const double> grid, double iou_thresh) {
  if (grid.empty()) throw std::invalid_argument("best_threshold: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("best_threshold: grid must be ascending");
  }
  if (preds.size() != gt.size()) throw std::invalid_argument("best_threshold: length mismatch");
  std::size_t total = 0;
  for (const auto& p : preds) total += p.size();
  if (total == 0) return {grid.back(), 0.0};

  ThresholdChoice best{grid.front(), -1.0};
  std::vector<MatchResult> matches(preds.size());
  std::vector<Detection> kept;
  for (double thr : grid) {
    for (std::size_t s = 0; s < preds.size(); ++s) {
      kept.clear();
      for (const auto& d : preds[s])
        if (d.score >= thr) kept.push_back(d);
      matches[s] = match_at_iou(kept, gt[s], iou_thresh);
    }
    const double f = f_beta(precision_recall(matches), beta);
    if (f >= best.fbeta) best = {thr, f};
  }
  return best;
}

namespace {

struct EndpointFit {
  double start, end, sse;
};

EndpointFit fit_endpoints(std::span<const SchedulePoint> pts, double kappa) {
  double suu = 0, suw = 0, sww = 0, suy = 0, swy = 0, sy = 0;
  for (const auto& p : pts) {
    const double w = arctan_ramp(p.x, kappa);
    const double u = 1.0 - w;
    suu += u * u;
    suw += u * w;
    sww += w * w;
    suy += u * p.y;
    swy += w * p.y;
    sy += p.y;
  }
  const double det = suu * sww - suw * suw;
  EndpointFit f{};
  if (std::abs(det) <= 1e-14 * (suu * sww + 1e-300)) {
    f.start = f.end = sy / static_cast<double>(pts.size());
  } else {
    f.start = (suy * sww - swy * suw) / det;
    f.end = (suu * swy - suw * suy) / det;
  }
  for (const auto& p : pts) {
    const double r = f.start + (f.end - f.start) * arctan_ramp(p.x, kappa) - p.y;
    f.sse += r * r;
  }
  return f;
}

}  // namespace

ArctanFit fit_arctan_schedule(std::span<const SchedulePoint> points) {
  if (points.size() < 3) throw std::invalid_argument("fit_arctan_schedule: need >= 3 points");
  constexpr int kGrid = 200;
  constexpr double kStep = 0.25;
  ArctanFit best;
  best.sse = std::numeric_limits<double>::infinity();
  int best_k = 1;
  for (int k = 1; k <= kGrid; ++k) {
    const double kappa = kStep * k;
    const auto f = fit_endpoints(points, kappa);
    if (f.sse < best.sse) {
      best = {f.start, f.end, kappa, f.sse};
      best_k = k;
    }
  }
  // Golden-section refinement inside the neighbouring grid cells.
  double lo = kStep * std::max(best_k - 1, 1) * (best_k == 1 ? 0.2 : 1.0);
  double hi = kStep * std::min(best_k + 1, kGrid);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  auto fa = fit_endpoints(points, a), fb = fit_endpoints(points, b);
  for (int it = 0; it < 80; ++it) {
    if (fa.sse < fb.sse) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = fit_endpoints(points, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = fit_endpoints(points, b);
    }
  }
  if (fa.sse < best.sse) best = {fa.start, fa.end, a, fa.sse};
  if (fb.sse < best.sse) best = {fb.start, fb.end, b, fb.sse};
  return best;
}

}  // namespace dcl
