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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace dcl {

namespace {

// Stream tags for the per-run random streams.
constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kLabelledStream = 23;
constexpr std::uint64_t kUnlabelledStream = 37;

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> names,
             const char* what) {
  for (const auto& [n, v] : names) {
    if (s == n) return v;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

std::string to_string(InitMode m) { return m == InitMode::kWarmstart ? "warmstart" : "random"; }
std::string to_string(EmaMode m) { return m == EmaMode::kEpoch ? "epoch" : "iteration"; }
std::string to_string(EvalModel m) { return m == EvalModel::kTeacher ? "teacher" : "student"; }
std::string to_string(Regime r) {
  switch (r) {
    case Regime::kVirtuous: return "virtuous";
    case Regime::kVicious: return "vicious";
    case Regime::kIndeterminate: break;
  }
  return "indeterminate";
}

InitMode parse_init_mode(const std::string& s) {
  return parse_enum<InitMode>(s, {{"warmstart", InitMode::kWarmstart}, {"random", InitMode::kRandom}},
                              "init mode");
}
EmaMode parse_ema_mode(const std::string& s) {
  return parse_enum<EmaMode>(s, {{"epoch", EmaMode::kEpoch}, {"iteration", EmaMode::kIteration}},
                             "ema mode");
}
EvalModel parse_eval_model(const std::string& s) {
  return parse_enum<EvalModel>(s, {{"teacher", EvalModel::kTeacher}, {"student", EvalModel::kStudent}},
                               "eval model");
}

void EngineConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  policy.validate();
  policy.aug.validate();
  if (shape.pool <= 0 || shape.channels <= 0 || shape.hidden <= 0 || shape.queries <= 0 ||
      shape.classes <= 0) {
    fail("model", "all detector dimensions must be positive");
  }
  if (!(loss.reg_weight >= 0.0)) fail("model.reg_weight", "must be >= 0");
  if (!(loss.noobj_weight >= 0.0)) fail("model.noobj_weight", "must be >= 0");
  if (!(lr > 0.0)) fail("optim.lr", "must be positive");
  if (!(adamw.beta1 >= 0.0 && adamw.beta1 < 1.0)) fail("optim.beta1", "must lie in [0,1)");
  if (!(adamw.beta2 >= 0.0 && adamw.beta2 < 1.0)) fail("optim.beta2", "must lie in [0,1)");
  if (!(adamw.eps > 0.0)) fail("optim.eps", "must be positive");
  if (!(adamw.weight_decay >= 0.0)) fail("optim.weight_decay", "must be >= 0");
  if (!(lr_decay_at >= 0.0 && lr_decay_at <= 1.0)) fail("optim.lr_decay_at", "must lie in [0,1]");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
    fail("optim.lr_decay_factor", "must lie in (0,1]");
  }
  if (epochs < 0) fail("train.epochs", "must be >= 0");
  if (batch_size <= 0) fail("train.batch_size", "must be positive");
  if (!(warmstart_frac >= 0.0 && warmstart_frac <= 1.0)) {
    fail("train.warmstart_frac", "must lie in [0,1]");
  }
  if (unlabelled_ratio <= 0) fail("train.unlabelled_ratio", "must be positive");
  if (eval_every <= 0) fail("train.eval_every", "must be positive");
  if (checkpoint_every < 0) fail("train.checkpoint_every", "must be >= 0");
  if (!(pseudo_nms_iou > 0.0 && pseudo_nms_iou <= 1.0)) fail("train.pseudo_nms_iou", "must lie in (0,1]");
  if (regime_window < 2) fail("regime.window", "must be >= 2");
  if (!(regime_threshold >= 0.0)) fail("regime.threshold", "must be >= 0");
}

ModelParams ema_update(const ModelParams& teacher, const ModelParams& student, double m) {
  if (!(teacher.shape == student.shape) || teacher.values.size() != student.values.size()) {
    throw std::invalid_argument("ema_update: teacher and student shapes differ");
  }
  if (!(m > 0.0 && m < 1.0)) throw std::invalid_argument("ema_update: momentum must lie in (0,1)");
  ModelParams out = teacher;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = m * teacher.values[i] + (1.0 - m) * student.values[i];
  }
  return out;
}

std::uint64_t checksum(const ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : params.values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

PseudoSample generate_pseudo_labels(const std::function<std::vector<Detection>(const Image&)>& detect,
                                    const Scene& scene, const PolicySnapshot& snap, Rng& rng) {
  const AugOutcome weak = weak_augment(scene.image, snap.aug, rng);
  const std::vector<Detection> dets = detect(weak.image);
  PseudoSample out;
  LabelSet kept;
  for (const auto& d : dets) {
    if (d.score > 0.9) ++out.conf90;
    if (d.score > 0.5) ++out.conf50;
    if (d.score > snap.sigma_t) kept.add(d.box, d.class_id);
  }
  auto [strong, labels] = strong_augment(weak.image, kept, snap.aug, rng);
  out.image = std::move(strong.image);
  out.labels = std::move(labels);
  return out;
}

PseudoSample generate_pseudo_labels(const ModelParams& teacher, const Scene& scene,
                                    const PolicySnapshot& snap, Rng& rng, bool require_argmax,
                                    double nms_iou) {
  return generate_pseudo_labels(
      [&](const Image& img) {
        const auto preds = forward(teacher, img);
        return suppress_duplicates(require_argmax ? to_detections(preds, 0.0) : rank_all_queries(preds),
                                   nms_iou);
      },
      scene, snap, rng);
}

TrainerState init_state(const EngineConfig& cfg, std::uint64_t seed) {
  TrainerState s;
  Rng init(seed, kInitStream);
  s.student = ModelParams::random(cfg.shape, init, cfg.no_object_bias);
  s.teacher = s.student;
  s.optimizer.m.assign(s.student.values.size(), 0.0);
  s.optimizer.v.assign(s.student.values.size(), 0.0);
  s.total_epochs = cfg.epochs;
  s.seed = seed;
  return s;
}

StepLog train_epoch(TrainerState& state, std::span<const Scene> labelled,
                    std::span<const Scene> unlabelled, const PolicySnapshot& snap,
                    const EngineConfig& cfg, double lr) {
  if (labelled.empty()) throw std::invalid_argument("train_epoch: labelled set D_X is empty");
  const auto pass = static_cast<std::uint64_t>(state.pass);
  Rng lab_rng = Rng(state.seed, kLabelledStream).split(pass);
  Rng unl_rng = Rng(state.seed, kUnlabelledStream).split(pass);

  std::vector<int> order(labelled.size());
  std::iota(order.begin(), order.end(), 0);
  lab_rng.shuffle(order);
  std::vector<int> pool(unlabelled.size());
  std::iota(pool.begin(), pool.end(), 0);
  const bool use_unlabelled = !unlabelled.empty() && snap.pi_t > 0.0;
  if (use_unlabelled) unl_rng.shuffle(pool);
  std::size_t cursor = 0;

  StepLog log;
  log.alpha = snap.alpha_t;
  log.sigma = snap.sigma_t;
  log.pi = snap.pi_t;
  log.momentum = snap.m_t;
  log.lr = lr;

  const std::size_t n_params = state.student.values.size();
  std::vector<double> grad(n_params);
  std::vector<double> grad_u(n_params);
  double sum_l = 0.0, sum_lu = 0.0, sum_all = 0.0;
  long conf90 = 0, conf50 = 0;
  int iterations = 0;
  const std::uint64_t teacher_sum = checksum(state.teacher);
  std::uint64_t expected_teacher = teacher_sum;

  const auto B = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t start = 0; start < order.size(); start += B) {
    const std::size_t end = std::min(order.size(), start + B);
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(end - start);

    double batch_l = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      const Scene& s = labelled[static_cast<std::size_t>(order[k])];
      const AugOutcome w = weak_augment(s.image, snap.aug, lab_rng);
      const LabelSet y = map_labels(w.geometry, s.labels, snap.aug.min_visible);
      const ForwardCache cache = forward_cache(state.student, w.image);
      const auto preds = decode(cfg.shape, cache.outputs);
      const LossResult res = detection_loss(preds, y, cfg.loss);
      batch_l += res.loss * inv_b;
      accumulate_gradient(state.student, cache, res.grad, inv_b, grad);
    }
    log.labelled_seen += static_cast<int>(end - start);

    double batch_lu = 0.0;
    if (use_unlabelled) {
      std::vector<int> draw;
      const std::size_t n_draw = (end - start) * static_cast<std::size_t>(cfg.unlabelled_ratio);
      for (std::size_t k = 0; k < n_draw; ++k) {
        draw.push_back(pool[cursor]);
        cursor = (cursor + 1) % pool.size();
      }
      const std::vector<int> admitted = sample_unlabelled(draw, snap.pi_t, unl_rng);
      if (!admitted.empty()) {
        std::fill(grad_u.begin(), grad_u.end(), 0.0);
        const double inv_u = 1.0 / static_cast<double>(admitted.size());
        for (int id : admitted) {
          const Scene& s = unlabelled[static_cast<std::size_t>(id)];
          PseudoSample ps =
              generate_pseudo_labels(state.teacher, s, snap, unl_rng,
                                            cfg.pseudo_require_argmax, cfg.pseudo_nms_iou);
          conf90 += ps.conf90;
          conf50 += ps.conf50;
          log.pseudo_labels += static_cast<int>(ps.labels.size());
          const ForwardCache cache = forward_cache(state.student, ps.image);
          const auto preds = decode(cfg.shape, cache.outputs);
          const LossResult res = detection_loss(preds, ps.labels, cfg.loss);
          batch_lu += res.loss * inv_u;
          if (snap.alpha_t != 0.0) accumulate_gradient(state.student, cache, res.grad, inv_u, grad_u);
        }
        log.unlabelled_seen += static_cast<int>(admitted.size());
        if (snap.alpha_t != 0.0) {
          for (std::size_t i = 0; i < n_params; ++i) grad[i] += snap.alpha_t * grad_u[i];
        }
      }
    }

    sum_l += batch_l;
    sum_lu += batch_lu;
    sum_all += batch_l + snap.alpha_t * batch_lu;
    ++iterations;

    optimizer_step(state.student, grad, lr, cfg.adamw, state.optimizer);
    ++state.iteration;
    if (cfg.ema == EmaMode::kIteration) {
      if (checksum(state.teacher) != expected_teacher) {
        throw std::logic_error("teacher parameters changed outside the EMA update");
      }
      state.teacher = ema_update(state.teacher, state.student, snap.m_t);
      expected_teacher = checksum(state.teacher);
    }
  }

  if (cfg.ema == EmaMode::kEpoch) {
    if (checksum(state.teacher) != teacher_sum) {
      throw std::logic_error("teacher parameters changed outside the EMA update");
    }
    state.teacher = ema_update(state.teacher, state.student, snap.m_t);
  }
  ++state.pass;

  log.sup_loss = sum_l / iterations;
  log.unsup_loss = sum_lu / iterations;
  log.total_loss = sum_all / iterations;
  if (log.unlabelled_seen > 0) {
    log.pseudo_conf90 = static_cast<double>(conf90) / log.unlabelled_seen;
    log.pseudo_conf50 = static_cast<double>(conf50) / log.unlabelled_seen;
  }
  log.teacher_checksum = checksum(state.teacher);
  return log;
}

MetricsRecord evaluate(const ModelParams& params, std::span<const Scene> scenes) {
  std::vector<std::vector<Detection>> preds;
  std::vector<LabelSet> gts;
  preds.reserve(scenes.size());
  gts.reserve(scenes.size());
  for (const auto& s : scenes) {
    preds.push_back(rank_all_queries(forward(params, s.image)));
    gts.push_back(s.labels);
  }
  return coco_metrics(preds, gts, params.shape.classes);
}

double mean_confident(const ModelParams& params, std::span<const Scene> scenes, double level) {
  if (scenes.empty()) return 0.0;
  long n = 0;
  for (const auto& s : scenes) {
    for (const auto& d : predict(params, s.image, 0.0)) {
      if (d.score > level) ++n;
    }
  }
  return static_cast<double>(n) / static_cast<double>(scenes.size());
}

double learning_rate(const EngineConfig& cfg, int epoch) {
  return epoch >= cfg.lr_decay_at * cfg.epochs ? cfg.lr * cfg.lr_decay_factor : cfg.lr;
}

namespace {

void update_covariance(std::vector<StepLog>& history) {
  std::vector<double> losses, pis, alphas;
  for (const auto& h : history) {
    if (h.unlabelled_seen == 0) continue;
    losses.push_back(h.unsup_loss);
    pis.push_back(h.pi);
    alphas.push_back(h.alpha);
  }
  StepLog& last = history.back();
  if (losses.size() < 2) return;
  const double mean_pi = std::accumulate(pis.begin(), pis.end(), 0.0) / static_cast<double>(pis.size());
  std::vector<double> p(losses.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = alphas[i] * pis[i] / mean_pi;
  last.has_covariance = true;
  last.covariance = covariance_diagnostic(losses, p);
}

}  // namespace

RunArtifacts run_training(const EngineConfig& cfg, std::span<const Scene> labelled,
                          std::span<const Scene> unlabelled, std::span<const Scene> val,
                          std::uint64_t seed, const EpochCallback& on_epoch) {
  cfg.validate();
  if (labelled.empty()) throw std::invalid_argument("run_training: labelled set D_X is empty");
  RunArtifacts art;
  TrainerState& st = art.state;
  st = init_state(cfg, seed);
  const ModelParams& (*pick)(const TrainerState&) =
      cfg.eval_model == EvalModel::kTeacher
          ? +[](const TrainerState& s) -> const ModelParams& { return s.teacher; }
          : +[](const TrainerState& s) -> const ModelParams& { return s.student; };

  const int T = cfg.epochs;
  if (T == 0) {
    if (!val.empty()) art.final_metrics = evaluate(pick(st), val);
    return art;
  }
  const double horizon = std::max(1, T - 1);

  if (cfg.init == InitMode::kWarmstart) {
    const int W = static_cast<int>(std::lround(cfg.warmstart_frac * T));
    PolicySnapshot sup = snapshot(cfg.policy, 0.0, horizon);
    sup.pi_t = 0.0;
    sup.alpha_t = 0.0;
    for (int w = 0; w < W; ++w) train_epoch(st, labelled, {}, sup, cfg, cfg.lr);
    st.teacher = st.student;
  }

  for (int e = 0; e < T; ++e) {
    const PolicySnapshot snap = snapshot(cfg.policy, static_cast<double>(e), horizon);
    StepLog log = train_epoch(st, labelled, unlabelled, snap, cfg, learning_rate(cfg, e));
    log.epoch = e + 1;
    st.epoch = e + 1;
    if ((e + 1) % cfg.eval_every == 0 || e + 1 == T) {
      if (!val.empty()) {
        const MetricsRecord m = evaluate(pick(st), val);
        log.evaluated = true;
        log.val_ap50 = 100.0 * m.AP50;
        log.val_map = 100.0 * m.mAP;
        log.val_conf90 = mean_confident(st.teacher, val, 0.9);
        log.val_conf50 = mean_confident(st.teacher, val, 0.5);
      }
    }
    st.history.push_back(log);
    update_covariance(st.history);
    if (cfg.checkpoint_every > 0 && ((e + 1) % cfg.checkpoint_every == 0 || e + 1 == T)) {
      art.checkpoints.push_back({e + 1, st.teacher, st.student});
    }
    if (on_epoch) on_epoch(st.history.back());
  }
  if (!val.empty()) art.final_metrics = evaluate(pick(st), val);
  art.regime = detect_cycle_regime(st.history, cfg.regime_window, cfg.regime_threshold);
  return art;
}

double ols_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("ols_slope: length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

Regime detect_cycle_regime(std::span<const StepLog> history, int window, double threshold) {
  if (window < 2) throw std::invalid_argument("detect_cycle_regime: window must be >= 2");
  std::vector<double> xs, ap, conf;
  for (const auto& h : history) {
    if (!h.evaluated) continue;
    xs.push_back(h.epoch);
    ap.push_back(h.val_ap50);
    conf.push_back(h.val_conf90);
  }
  const auto w = static_cast<std::size_t>(window);
  if (xs.size() < w) return Regime::kIndeterminate;
  const std::size_t from = xs.size() - w;
  const std::span<const double> x(xs.data() + from, w);
  const double ap_slope = ols_slope(x, {ap.data() + from, w});
  const double conf_slope = ols_slope(x, {conf.data() + from, w});
  if (conf_slope > 0.0 && ap_slope > threshold) return Regime::kVirtuous;
  if (conf_slope > 0.0 && ap_slope < -threshold) return Regime::kVicious;
  return Regime::kIndeterminate;
}

}  // namespace dcl
