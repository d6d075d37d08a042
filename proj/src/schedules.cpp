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

#include "dcl/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dcl {

std::string to_string(ScheduleShape shape) {
  switch (shape) {
    case ScheduleShape::kConstant: return "constant";
    case ScheduleShape::kLinear: return "linear";
    case ScheduleShape::kLinearWarmupCooldown: return "linear-warmup-cooldown";
    case ScheduleShape::kCosine: return "cosine";
    case ScheduleShape::kArctan: return "arctan";
  }
  return "constant";
}

ScheduleShape parse_shape(const std::string& name) {
  for (auto s : {ScheduleShape::kConstant, ScheduleShape::kLinear,
                 ScheduleShape::kLinearWarmupCooldown, ScheduleShape::kCosine,
                 ScheduleShape::kArctan}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown schedule shape '" + name + "'");
}

double arctan_ramp(double x, double kappa) { return std::atan(kappa * x) / std::atan(kappa); }

double eval_schedule(const Schedule& s, double t, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("eval_schedule: total steps must be positive");
  if (t < 0.0 || t > T) throw std::invalid_argument("eval_schedule: t outside [0, T]");
  const double span = s.v_end - s.v_start;
  const double x = t / T;
  switch (s.shape) {
    case ScheduleShape::kConstant:
      return s.v_start;
    case ScheduleShape::kLinear:
      return s.v_start + span * x;
    case ScheduleShape::kLinearWarmupCooldown: {
      const double warm_end = s.warmup_frac * T;
      const double cool_start = T - s.cooldown_frac * T;
      if (t < warm_end) return 0.0;
      if (t >= cool_start) return s.v_end;
      return s.v_start + span * (t - warm_end) / (cool_start - warm_end);
    }
    case ScheduleShape::kCosine:
      return s.v_end - span * (std::cos(std::numbers::pi * x) + 1.0) / 2.0;
    case ScheduleShape::kArctan:
      return s.v_start + span * arctan_ramp(x, s.steepness);
  }
  return s.v_start;
}

double Schedule::min_value() const {
  double lo = std::min(v_start, v_end);
  if (shape == ScheduleShape::kConstant) lo = v_start;
  if (shape == ScheduleShape::kLinearWarmupCooldown && warmup_frac > 0.0) lo = std::min(lo, 0.0);
  return lo;
}

double Schedule::max_value() const {
  double hi = std::max(v_start, v_end);
  if (shape == ScheduleShape::kConstant) hi = v_start;
  if (shape == ScheduleShape::kLinearWarmupCooldown && warmup_frac > 0.0) hi = std::max(hi, 0.0);
  return hi;
}

void Schedule::validate(const std::string& name) const {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("policy." + name + ": " + why);
  };
  if (!std::isfinite(v_start) || !std::isfinite(v_end)) fail("endpoints must be finite");
  if (!(warmup_frac >= 0.0 && warmup_frac <= 0.5)) fail("warmup must lie in [0, 0.5]");
  if (!(cooldown_frac >= 0.0 && cooldown_frac <= 0.5)) fail("cooldown must lie in [0, 0.5]");
  if (shape == ScheduleShape::kArctan && !(steepness > 0.0)) fail("steepness must be positive");
}

void PolicyBundle::validate() const {
  pi.validate("pi");
  alpha.validate("alpha");
  sigma.validate("sigma");
  momentum.validate("momentum");
  if (pi.min_value() < 0.0 || pi.max_value() > 1.0) {
    throw std::invalid_argument("policy.pi: values must lie in [0,1]");
  }
  if (alpha.min_value() < 0.0) throw std::invalid_argument("policy.alpha: must be nonnegative");
  if (!(sigma.min_value() > 0.0 && sigma.max_value() < 1.0)) {
    throw std::invalid_argument("policy.sigma: values must lie in (0,1)");
  }
  if (!(momentum.min_value() > 0.0 && momentum.max_value() < 1.0)) {
    throw std::invalid_argument("policy.momentum: values must lie in (0,1)");
  }
  aug.validate();
}

PolicySnapshot snapshot(const PolicyBundle& bundle, double t, double T) {
  PolicySnapshot s;
  s.pi_t = std::clamp(eval_schedule(bundle.pi, t, T), 0.0, 1.0);
  s.alpha_t = eval_schedule(bundle.alpha, t, T);
  s.sigma_t = eval_schedule(bundle.sigma, t, T);
  s.m_t = eval_schedule(bundle.momentum, t, T);
  s.aug = bundle.aug;
  return s;
}

std::vector<int> sample_unlabelled(std::span<const int> batch, double pi_t, Rng& rng) {
  if (!(pi_t >= 0.0 && pi_t <= 1.0)) {
    throw std::invalid_argument("sample_unlabelled: pi_t must lie in [0,1]");
  }
  std::vector<int> kept;
  for (int id : batch) {
    if (rng.bernoulli(pi_t)) kept.push_back(id);
  }
  return kept;
}

double covariance_diagnostic(std::span<const double> losses, std::span<const double> probs) {
  if (losses.size() != probs.size()) {
    throw std::invalid_argument("covariance_diagnostic: length mismatch");
  }
  if (losses.size() < 2) throw std::invalid_argument("covariance_diagnostic: need >= 2 pairs");
  const double n = static_cast<double>(losses.size());
  double ml = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    ml += losses[i];
    mp += probs[i];
  }
  ml /= n;
  mp /= n;
  double acc = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) acc += (losses[i] - ml) * (probs[i] - mp);
  return acc / n;
}

}  // namespace dcl
