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

#include "dcl/augment.hpp"
#include "dcl/rng.hpp"

namespace dcl {

enum class ScheduleShape { kConstant, kLinear, kLinearWarmupCooldown, kCosine, kArctan };

std::string to_string(ScheduleShape shape);
// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
ScheduleShape parse_shape(const std::string& name);

// Time-indexed scalar schedule over t in [0, T].
struct Schedule {
  ScheduleShape shape = ScheduleShape::kConstant;
  double v_start = 0.0;
  double v_end = 0.0;
  double warmup_frac = 0.0;    // linear-warmup-cooldown only
  double cooldown_frac = 0.0;  // linear-warmup-cooldown only
  double steepness = 5.0;      // arctan only

  static Schedule constant(double v) { return {ScheduleShape::kConstant, v, v, 0.0, 0.0, 5.0}; }
  static Schedule linear(double a, double b) { return {ScheduleShape::kLinear, a, b, 0.0, 0.0, 5.0}; }
  static Schedule warmup_cooldown(double a, double b, double warm, double cool) {
    return {ScheduleShape::kLinearWarmupCooldown, a, b, warm, cool, 5.0};
  }
  static Schedule cosine(double a, double b) { return {ScheduleShape::kCosine, a, b, 0.0, 0.0, 5.0}; }
  static Schedule arctan(double a, double b, double kappa = 5.0) {
    return {ScheduleShape::kArctan, a, b, 0.0, 0.0, kappa};
  }

  // Smallest and largest value the schedule takes (0 included for warmup).
  double min_value() const;
  double max_value() const;

  void validate(const std::string& name) const;
  bool operator==(const Schedule&) const = default;
};

// Throws std::invalid_argument when T <= 0 or t is outside [0, T].
double eval_schedule(const Schedule& s, double t, double T);

// arctan(kappa * x) / arctan(kappa), the normalized arctan ramp on [0,1].
double arctan_ramp(double x, double kappa);

// Π = {π_t, α_t, ς_t, A, m_t}.
struct PolicyBundle {
  Schedule pi = Schedule::warmup_cooldown(0.0, 1.0, 0.25, 0.25);
  Schedule alpha = Schedule::linear(0.1, 1.0);
  Schedule sigma = Schedule::arctan(0.1, 0.6, 5.0);
  Schedule momentum = Schedule::cosine(0.998, 0.9998);
  AugConfig aug;

  // Checks value ranges over the whole horizon.
  void validate() const;
  bool operator==(const PolicyBundle&) const = default;
};

struct PolicySnapshot {
  double pi_t = 0.0;
  double alpha_t = 0.0;
  double sigma_t = 0.0;
  double m_t = 0.0;
  AugConfig aug;
};

PolicySnapshot snapshot(const PolicyBundle& bundle, double t, double T);

// Keeps each id independently with probability pi_t.
std::vector<int> sample_unlabelled(std::span<const int> batch, double pi_t, Rng& rng);

// (1/n) Σ (L'_j − mean L')(p_j − mean p). Throws when fewer than 2 pairs.
double covariance_diagnostic(std::span<const double> losses, std::span<const double> probs);

}  // namespace dcl
