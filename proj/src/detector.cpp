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

#include "dcl/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dcl {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct Layout {
  std::size_t w1, b1, w2, b2;
};

Layout layout(const DetectorShape& s) {
  const auto in = static_cast<std::size_t>(s.input_dim());
  const auto hid = static_cast<std::size_t>(s.hidden);
  const auto out = static_cast<std::size_t>(s.output_dim());
  Layout l{};
  l.w1 = 0;
  l.b1 = hid * in;
  l.w2 = l.b1 + hid;
  l.b2 = l.w2 + out * hid;
  return l;
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

std::size_t DetectorShape::param_count() const {
  const auto in = static_cast<std::size_t>(input_dim());
  const auto hid = static_cast<std::size_t>(hidden);
  const auto out = static_cast<std::size_t>(output_dim());
  return hid * in + hid + out * hid + out;
}

ModelParams ModelParams::zeros(const DetectorShape& shape) {
  return {shape, std::vector<double>(shape.param_count(), 0.0)};
}

ModelParams ModelParams::random(const DetectorShape& shape, Rng& rng, double no_object_bias) {
  ModelParams p = zeros(shape);
  const Layout l = layout(shape);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(shape.input_dim()));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (std::size_t i = l.w1; i < l.b1; ++i) p.values[i] = s1 * rng.normal();
  for (std::size_t i = l.w2; i < l.b2; ++i) p.values[i] = s2 * rng.normal();
  for (int q = 0; q < shape.queries; ++q) {
    p.values[l.b2 + static_cast<std::size_t>(q * shape.per_query() + shape.classes)] =
        no_object_bias;
  }
  return p;
}

bool ModelParams::finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Prediction Prediction::from_raw(std::span<const double> logits, std::span<const double> box_raw) {
  Prediction p;
  p.logits.assign(logits.begin(), logits.end());
  const double lse = log_sum_exp(logits);
  p.probs.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) p.probs[k] = std::exp(logits[k] - lse);
  for (int i = 0; i < 4; ++i) p.box_raw[static_cast<std::size_t>(i)] = box_raw[static_cast<std::size_t>(i)];
  p.box = {sigmoid(box_raw[0]), sigmoid(box_raw[1]), sigmoid(box_raw[2]), sigmoid(box_raw[3])};
  return p;
}

Prediction Prediction::with_box(std::span<const double> logits, const CenterBox& box) {
  auto logit = [](double v) { return std::log(v / (1.0 - v)); };
  const std::array<double, 4> raw{logit(box.cx), logit(box.cy), logit(box.w), logit(box.h)};
  Prediction p = from_raw(logits, raw);
  p.box = box;
  return p;
}

int Prediction::argmax() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

int Prediction::foreground_class() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end() - 1) - probs.begin());
}

double Prediction::foreground_score() const {
  return *std::max_element(probs.begin(), probs.end() - 1);
}

std::vector<double> pool_features(const Image& img, const DetectorShape& shape) {
  const int P = shape.pool;
  if (img.channels != shape.channels || img.height % P != 0 || img.width % P != 0 ||
      img.height == 0) {
    throw std::invalid_argument("image of " + std::to_string(img.height) + "x" +
                                std::to_string(img.width) + "x" + std::to_string(img.channels) +
                                " does not fit a " + std::to_string(P) + "x" +
                                std::to_string(P) + " pooling grid with " +
                                std::to_string(shape.channels) + " channels");
  }
  const int ch = img.height / P;
  const int cw = img.width / P;
  std::vector<double> f(static_cast<std::size_t>(shape.input_dim()), 0.0);
  for (int y = 0; y < img.height; ++y) {
    const int gy = y / ch;
    for (int x = 0; x < img.width; ++x) {
      const int gx = x / cw;
      for (int c = 0; c < img.channels; ++c) {
        f[static_cast<std::size_t>((c * P + gy) * P + gx)] += img.at(y, x, c);
      }
    }
  }
  const double inv = 1.0 / (ch * cw);
  for (double& v : f) v = v * inv - 0.5;
  return f;
}

ForwardCache forward_cache(const ModelParams& params, const Image& img) {
  const DetectorShape& s = params.shape;
  if (!params.consistent()) throw std::invalid_argument("parameter vector does not match shape");
  const Layout l = layout(s);
  ForwardCache c;
  c.features = pool_features(img, s);
  const auto in = static_cast<std::size_t>(s.input_dim());
  const auto hid = static_cast<std::size_t>(s.hidden);
  const auto out = static_cast<std::size_t>(s.output_dim());
  const double* w = params.values.data();
  c.hidden.resize(hid);
  for (std::size_t h = 0; h < hid; ++h) {
    double z = w[l.b1 + h];
    const double* row = w + l.w1 + h * in;
    for (std::size_t i = 0; i < in; ++i) z += row[i] * c.features[i];
    c.hidden[h] = std::tanh(z);
  }
  c.outputs.resize(out);
  for (std::size_t o = 0; o < out; ++o) {
    double z = w[l.b2 + o];
    const double* row = w + l.w2 + o * hid;
    for (std::size_t h = 0; h < hid; ++h) z += row[h] * c.hidden[h];
    c.outputs[o] = z;
  }
  return c;
}

std::vector<Prediction> decode(const DetectorShape& shape, std::span<const double> outputs) {
  std::vector<Prediction> preds;
  preds.reserve(static_cast<std::size_t>(shape.queries));
  const auto per = static_cast<std::size_t>(shape.per_query());
  const auto ncls = static_cast<std::size_t>(shape.classes + 1);
  for (int q = 0; q < shape.queries; ++q) {
    const auto base = static_cast<std::size_t>(q) * per;
    preds.push_back(Prediction::from_raw(outputs.subspan(base, ncls), outputs.subspan(base + ncls, 4)));
  }
  return preds;
}

std::vector<Prediction> forward(const ModelParams& params, const Image& img) {
  const auto cache = forward_cache(params, img);
  return decode(params.shape, cache.outputs);
}

CostMatrix matching_cost(std::span<const Prediction> preds, const LabelSet& targets,
                         const LossConfig& cfg) {
  CostMatrix cost(targets.size(), preds.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto cls = static_cast<std::size_t>(targets.classes[t]);
    for (std::size_t q = 0; q < preds.size(); ++q) {
      const double nll = log_sum_exp(preds[q].logits) - preds[q].logits[cls];
      cost(t, q) = nll + cfg.reg_weight * l1_distance(to_corners(preds[q].box), targets.boxes[t]);
    }
  }
  return cost;
}

LossResult detection_loss(std::span<const Prediction> preds, const LabelSet& targets,
                          const LossConfig& cfg) {
  if (targets.size() > preds.size()) {
    throw std::invalid_argument("detection_loss: " + std::to_string(targets.size()) +
                                " targets exceed " + std::to_string(preds.size()) + " queries");
  }
  if (!targets.consistent()) throw std::invalid_argument("detection_loss: ragged label set");
  LossResult r;
  if (preds.empty()) return r;
  const std::size_t ncls = preds.front().logits.size();
  const std::size_t per = ncls + 4;
  const std::size_t noobj = ncls - 1;
  const double inv_q = 1.0 / static_cast<double>(preds.size());
  r.grad.assign(preds.size() * per, 0.0);
  r.matching = hungarian_match(matching_cost(preds, targets, cfg));

  std::vector<std::ptrdiff_t> target_of(preds.size(), -1);
  for (const auto& [t, q] : r.matching.pairs) target_of[q] = static_cast<std::ptrdiff_t>(t);

  for (std::size_t q = 0; q < preds.size(); ++q) {
    const Prediction& p = preds[q];
    double* g = r.grad.data() + q * per;
    const double lse = log_sum_exp(p.logits);
    if (target_of[q] < 0) {
      const double w = cfg.noobj_weight * inv_q;
      r.loss += w * (lse - p.logits[noobj]);
      for (std::size_t k = 0; k < ncls; ++k) g[k] = w * (p.probs[k] - (k == noobj ? 1.0 : 0.0));
      continue;
    }
    const auto t = static_cast<std::size_t>(target_of[q]);
    const auto cls = static_cast<std::size_t>(targets.classes[t]);
    r.loss += inv_q * (lse - p.logits[cls]);
    for (std::size_t k = 0; k < ncls; ++k) g[k] = inv_q * (p.probs[k] - (k == cls ? 1.0 : 0.0));

    const BBox pc = to_corners(p.box);
    const BBox& tb = targets.boxes[t];
    r.loss += inv_q * cfg.reg_weight * l1_distance(pc, tb);
    const double s0 = sign(pc.xmin - tb.xmin), s1 = sign(pc.ymin - tb.ymin);
    const double s2 = sign(pc.xmax - tb.xmax), s3 = sign(pc.ymax - tb.ymax);
    const double scale = inv_q * cfg.reg_weight;
    const std::array<double, 4> dbox{s0 + s2, s1 + s3, 0.5 * (s2 - s0), 0.5 * (s3 - s1)};
    const std::array<double, 4> bv{p.box.cx, p.box.cy, p.box.w, p.box.h};
    for (std::size_t i = 0; i < 4; ++i) g[ncls + i] = scale * dbox[i] * bv[i] * (1.0 - bv[i]);
  }
  return r;
}

void accumulate_gradient(const ModelParams& params, const ForwardCache& cache,
                         std::span<const double> grad_out, double scale,
                         std::span<double> grad) {
  const DetectorShape& s = params.shape;
  const Layout l = layout(s);
  const auto in = static_cast<std::size_t>(s.input_dim());
  const auto hid = static_cast<std::size_t>(s.hidden);
  const auto out = static_cast<std::size_t>(s.output_dim());
  if (grad_out.size() != out || grad.size() != params.values.size()) {
    throw std::invalid_argument("backward: gradient shape mismatch");
  }
  const double* w = params.values.data();
  std::vector<double> dh(hid, 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    const double go = scale * grad_out[o];
    if (go == 0.0) continue;
    grad[l.b2 + o] += go;
    double* gw = grad.data() + l.w2 + o * hid;
    const double* row = w + l.w2 + o * hid;
    for (std::size_t h = 0; h < hid; ++h) {
      gw[h] += go * cache.hidden[h];
      dh[h] += go * row[h];
    }
  }
  for (std::size_t h = 0; h < hid; ++h) {
    const double dz = dh[h] * (1.0 - cache.hidden[h] * cache.hidden[h]);
    if (dz == 0.0) continue;
    grad[l.b1 + h] += dz;
    double* gw = grad.data() + l.w1 + h * in;
    for (std::size_t i = 0; i < in; ++i) gw[i] += dz * cache.features[i];
  }
}

std::vector<double> backward(const ModelParams& params, const Image& img,
                             std::span<const double> grad_out) {
  const auto cache = forward_cache(params, img);
  std::vector<double> grad(params.values.size(), 0.0);
  accumulate_gradient(params, cache, grad_out, 1.0, grad);
  return grad;
}

void optimizer_step(ModelParams& params, std::span<const double> grad, double lr,
                    const AdamWConfig& cfg, OptimizerState& state) {
  const std::size_t n = params.values.size();
  if (grad.size() != n) throw std::invalid_argument("optimizer_step: gradient size mismatch");
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.step = 0;
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - lr * cfg.weight_decay;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params.values[i] = params.values[i] * decay - lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

std::vector<Detection> to_detections(std::span<const Prediction> preds, double floor) {
  std::vector<Detection> out;
  for (const auto& p : preds) {
    const int noobj = static_cast<int>(p.probs.size()) - 1;
    if (p.argmax() == noobj) continue;
    const double zeta = p.foreground_score();
    if (zeta < floor) continue;
    out.push_back({p.corners(), p.foreground_class(), zeta});
  }
  return out;
}

std::vector<Detection> predict(const ModelParams& params, const Image& img, double floor) {
  if (!(floor >= 0.0 && floor < 1.0)) throw std::invalid_argument("predict: floor must lie in [0,1)");
  return to_detections(forward(params, img), floor);
}

std::vector<Detection> suppress_duplicates(std::vector<Detection> dets, double iou_thresh) {
  if (iou_thresh >= 1.0) return dets;
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<Detection> kept;
  for (std::size_t i : order) {
    const Detection& d = dets[i];
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_id == d.class_id && iou(k.box, d.box) > iou_thresh;
    });
    if (!dup) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> rank_all_queries(std::span<const Prediction> preds) {
  std::vector<Detection> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back({p.corners(), p.foreground_class(), p.foreground_score()});
  return out;
}

void save_params(std::ostream& out, const ModelParams& params) {
  const auto& s = params.shape;
  out << "dcl-params 1\n";
  out << "shape " << s.pool << ' ' << s.channels << ' ' << s.hidden << ' ' << s.queries << ' '
      << s.classes << '\n';
  out << "count " << params.values.size() << '\n';
  char buf[40];
  for (double v : params.values) {
    const int n = std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out.write(buf, n);
  }
}

ModelParams load_params(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "dcl-params" || version != 1) {
    throw std::runtime_error("checkpoint: bad header");
  }
  ModelParams p;
  if (!(in >> tag) || tag != "shape" ||
      !(in >> p.shape.pool >> p.shape.channels >> p.shape.hidden >> p.shape.queries >>
        p.shape.classes)) {
    throw std::runtime_error("checkpoint: bad shape line");
  }
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "count" || count != p.shape.param_count()) {
    throw std::runtime_error("checkpoint: value count does not match shape");
  }
  p.values.resize(count);
  for (auto& v : p.values) {
    if (!(in >> v)) throw std::runtime_error("checkpoint: truncated values");
  }
  return p;
}

}  // namespace dcl
