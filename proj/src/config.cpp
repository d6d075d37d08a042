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

#include "dcl/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dcl {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  // strtod accepts the %.17g output exactly; reject trailing junk.
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return d;
}

long long parse_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

using Registry = std::vector<std::pair<std::string, Field>>;

void add_schedule(Registry& r, const std::string& name, Schedule PolicyBundle::*member) {
  auto s = [member](ExperimentConfig& c) -> Schedule& { return c.engine.policy.*member; };
  const std::string p = "policy." + name + ".";
  r.push_back({p + "shape",
               {[s](const ExperimentConfig& c) { return to_string(s(const_cast<ExperimentConfig&>(c)).shape); },
                [s, p](ExperimentConfig& c, const std::string& v) {
                  try {
                    s(c).shape = parse_shape(v);
                  } catch (const std::invalid_argument&) {
                    throw ConfigError(p + "shape: unknown schedule shape '" + v + "'");
                  }
                }}});
  auto dbl = [&](const std::string& key, double Schedule::*m) {
    r.push_back({p + key,
                 {[s, m](const ExperimentConfig& c) { return fmt_double(s(const_cast<ExperimentConfig&>(c)).*m); },
                  [s, m, k = p + key](ExperimentConfig& c, const std::string& v) { s(c).*m = parse_double(k, v); }}});
  };
  dbl("start", &Schedule::v_start);
  dbl("end", &Schedule::v_end);
  dbl("warmup", &Schedule::warmup_frac);
  dbl("cooldown", &Schedule::cooldown_frac);
  dbl("steepness", &Schedule::steepness);
}

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    // Accessors return a mutable reference; getters only read through it.
    auto add_double = [&r](const std::string& key, std::function<double&(ExperimentConfig&)> acc) {
      r.push_back({key,
                   {[acc](const ExperimentConfig& c) { return fmt_double(acc(const_cast<ExperimentConfig&>(c))); },
                    [acc, key](ExperimentConfig& c, const std::string& v) { acc(c) = parse_double(key, v); }}});
    };
    auto add_int = [&r](const std::string& key, std::function<int&(ExperimentConfig&)> acc) {
      r.push_back({key,
                   {[acc](const ExperimentConfig& c) { return std::to_string(acc(const_cast<ExperimentConfig&>(c))); },
                    [acc, key](ExperimentConfig& c, const std::string& v) {
                      const long long x = parse_integer(key, v);
                      if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": out of range");
                      acc(c) = static_cast<int>(x);
                    }}});
    };
    auto add_bool = [&r](const std::string& key, std::function<bool&(ExperimentConfig&)> acc) {
      r.push_back({key,
                   {[acc](const ExperimentConfig& c) {
                      return std::string(acc(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
                    },
                    [acc, key](ExperimentConfig& c, const std::string& v) { acc(c) = parse_bool(key, v); }}});
    };

    add_int("data.height", [](ExperimentConfig& c) -> int& { return c.data.height; });
    add_int("data.width", [](ExperimentConfig& c) -> int& { return c.data.width; });
    r.push_back({"data.count_probs",
                 {[](const ExperimentConfig& c) {
                    std::string out;
                    for (std::size_t i = 0; i < c.data.count_probs.size(); ++i) {
                      out += (i ? "," : "") + fmt_double(c.data.count_probs[i]);
                    }
                    return out;
                  },
                  [](ExperimentConfig& c, const std::string& v) {
                    c.data.count_probs.clear();
                    for (const auto& item : split_list(v, ',')) {
                      c.data.count_probs.push_back(parse_double("data.count_probs", item));
                    }
                  }}});
    add_int("data.num_classes", [](ExperimentConfig& c) -> int& { return c.data.num_classes; });
    r.push_back({"data.palette",
                 {[](const ExperimentConfig& c) {
                    std::string out;
                    for (std::size_t i = 0; i < c.data.palette.size(); ++i) {
                      const auto& p = c.data.palette[i];
                      out += (i ? ";" : "") + fmt_double(p[0]) + "," + fmt_double(p[1]) + "," + fmt_double(p[2]);
                    }
                    return out;
                  },
                  [](ExperimentConfig& c, const std::string& v) {
                    c.data.palette.clear();
                    for (const auto& triple : split_list(v, ';')) {
                      const auto parts = split_list(triple, ',');
                      if (parts.size() != 3) throw ConfigError("data.palette: each colour needs 3 components");
                      c.data.palette.push_back({parse_double("data.palette", parts[0]),
                                                parse_double("data.palette", parts[1]),
                                                parse_double("data.palette", parts[2])});
                    }
                  }}});
    add_double("data.min_size", [](ExperimentConfig& c) -> double& { return c.data.min_size; });
    add_double("data.max_size", [](ExperimentConfig& c) -> double& { return c.data.max_size; });
    add_double("data.clutter", [](ExperimentConfig& c) -> double& { return c.data.clutter; });
    add_double("data.occlusion", [](ExperimentConfig& c) -> double& { return c.data.occlusion; });
    add_int("data.train_size", [](ExperimentConfig& c) -> int& { return c.data.train_size; });
    add_int("data.val_size", [](ExperimentConfig& c) -> int& { return c.data.val_size; });
    add_int("data.test_size", [](ExperimentConfig& c) -> int& { return c.data.test_size; });
    r.push_back({"data.seed",
                 {[](const ExperimentConfig& c) { return std::to_string(c.data.seed); },
                  [](ExperimentConfig& c, const std::string& v) {
                    const long long x = parse_integer("data.seed", v);
                    if (x < 0) throw ConfigError("data.seed: must be >= 0");
                    c.data.seed = static_cast<std::uint64_t>(x);
                  }}});

    add_double("split.ratio", [](ExperimentConfig& c) -> double& { return c.split_ratio; });
    add_int("split.folds", [](ExperimentConfig& c) -> int& { return c.folds; });

    add_schedule(r, "pi", &PolicyBundle::pi);
    add_schedule(r, "alpha", &PolicyBundle::alpha);
    add_schedule(r, "sigma", &PolicyBundle::sigma);
    add_schedule(r, "momentum", &PolicyBundle::momentum);

    auto aug = [](ExperimentConfig& c) -> AugConfig& { return c.engine.policy.aug; };
    add_bool("aug.enabled", [aug](ExperimentConfig& c) -> bool& { return aug(c).enabled; });
    add_double("aug.weak_intensity", [aug](ExperimentConfig& c) -> double& { return aug(c).weak_intensity; });
    add_double("aug.strong_intensity", [aug](ExperimentConfig& c) -> double& { return aug(c).strong_intensity; });
    add_bool("aug.flip", [aug](ExperimentConfig& c) -> bool& { return aug(c).flip; });
    add_bool("aug.translate", [aug](ExperimentConfig& c) -> bool& { return aug(c).translate; });
    add_bool("aug.crop", [aug](ExperimentConfig& c) -> bool& { return aug(c).crop; });
    add_bool("aug.color_jitter", [aug](ExperimentConfig& c) -> bool& { return aug(c).color_jitter; });
    add_bool("aug.erase", [aug](ExperimentConfig& c) -> bool& { return aug(c).erase; });
    add_double("aug.flip_prob", [aug](ExperimentConfig& c) -> double& { return aug(c).flip_prob; });
    add_double("aug.max_translate", [aug](ExperimentConfig& c) -> double& { return aug(c).max_translate; });
    add_double("aug.max_jitter", [aug](ExperimentConfig& c) -> double& { return aug(c).max_jitter; });
    add_double("aug.min_crop_scale", [aug](ExperimentConfig& c) -> double& { return aug(c).min_crop_scale; });
    add_int("aug.erase_min_count", [aug](ExperimentConfig& c) -> int& { return aug(c).erase_min_count; });
    add_int("aug.erase_max_count", [aug](ExperimentConfig& c) -> int& { return aug(c).erase_max_count; });
    add_double("aug.erase_min_area", [aug](ExperimentConfig& c) -> double& { return aug(c).erase_min_area; });
    add_double("aug.erase_max_area", [aug](ExperimentConfig& c) -> double& { return aug(c).erase_max_area; });
    add_double("aug.min_visible", [aug](ExperimentConfig& c) -> double& { return aug(c).min_visible; });
    add_double("aug.crop_keep", [aug](ExperimentConfig& c) -> double& { return aug(c).crop_keep; });
    add_int("aug.crop_attempts", [aug](ExperimentConfig& c) -> int& { return aug(c).crop_attempts; });

    add_int("model.pool", [](ExperimentConfig& c) -> int& { return c.engine.shape.pool; });
    add_int("model.hidden", [](ExperimentConfig& c) -> int& { return c.engine.shape.hidden; });
    add_int("model.queries", [](ExperimentConfig& c) -> int& { return c.engine.shape.queries; });
    add_int("model.classes", [](ExperimentConfig& c) -> int& { return c.engine.shape.classes; });
    add_double("model.reg_weight", [](ExperimentConfig& c) -> double& { return c.engine.loss.reg_weight; });
    add_double("model.noobj_weight", [](ExperimentConfig& c) -> double& { return c.engine.loss.noobj_weight; });
    add_double("model.no_object_bias", [](ExperimentConfig& c) -> double& { return c.engine.no_object_bias; });

    add_double("optim.lr", [](ExperimentConfig& c) -> double& { return c.engine.lr; });
    add_double("optim.weight_decay", [](ExperimentConfig& c) -> double& { return c.engine.adamw.weight_decay; });
    add_double("optim.beta1", [](ExperimentConfig& c) -> double& { return c.engine.adamw.beta1; });
    add_double("optim.beta2", [](ExperimentConfig& c) -> double& { return c.engine.adamw.beta2; });
    add_double("optim.eps", [](ExperimentConfig& c) -> double& { return c.engine.adamw.eps; });
    add_double("optim.lr_decay_at", [](ExperimentConfig& c) -> double& { return c.engine.lr_decay_at; });
    add_double("optim.lr_decay_factor", [](ExperimentConfig& c) -> double& { return c.engine.lr_decay_factor; });

    add_int("train.epochs", [](ExperimentConfig& c) -> int& { return c.engine.epochs; });
    add_int("train.batch_size", [](ExperimentConfig& c) -> int& { return c.engine.batch_size; });
    add_int("train.unlabelled_ratio", [](ExperimentConfig& c) -> int& { return c.engine.unlabelled_ratio; });
    r.push_back({"train.init",
                 {[](const ExperimentConfig& c) { return to_string(c.engine.init); },
                  [](ExperimentConfig& c, const std::string& v) {
                    try {
                      c.engine.init = parse_init_mode(v);
                    } catch (const std::invalid_argument&) {
                      throw ConfigError("train.init: expected warmstart or random, got '" + v + "'");
                    }
                  }}});
    add_double("train.warmstart_frac", [](ExperimentConfig& c) -> double& { return c.engine.warmstart_frac; });
    r.push_back({"train.ema",
                 {[](const ExperimentConfig& c) { return to_string(c.engine.ema); },
                  [](ExperimentConfig& c, const std::string& v) {
                    try {
                      c.engine.ema = parse_ema_mode(v);
                    } catch (const std::invalid_argument&) {
                      throw ConfigError("train.ema: expected epoch or iteration, got '" + v + "'");
                    }
                  }}});
    r.push_back({"train.eval_model",
                 {[](const ExperimentConfig& c) { return to_string(c.engine.eval_model); },
                  [](ExperimentConfig& c, const std::string& v) {
                    try {
                      c.engine.eval_model = parse_eval_model(v);
                    } catch (const std::invalid_argument&) {
                      throw ConfigError("train.eval_model: expected teacher or student, got '" + v + "'");
                    }
                  }}});
    add_int("train.eval_every", [](ExperimentConfig& c) -> int& { return c.engine.eval_every; });
    add_int("train.checkpoint_every", [](ExperimentConfig& c) -> int& { return c.engine.checkpoint_every; });
    add_bool("train.pseudo_require_argmax",
             [](ExperimentConfig& c) -> bool& { return c.engine.pseudo_require_argmax; });
    add_double("train.pseudo_nms_iou", [](ExperimentConfig& c) -> double& { return c.engine.pseudo_nms_iou; });

    add_int("regime.window", [](ExperimentConfig& c) -> int& { return c.engine.regime_window; });
    add_double("regime.threshold", [](ExperimentConfig& c) -> double& { return c.engine.regime_threshold; });

    r.push_back({"run.seeds",
                 {[](const ExperimentConfig& c) {
                    std::string out;
                    for (std::size_t i = 0; i < c.seeds.size(); ++i) out += (i ? "," : "") + std::to_string(c.seeds[i]);
                    return out;
                  },
                  [](ExperimentConfig& c, const std::string& v) {
                    c.seeds.clear();
                    if (v.empty()) return;
                    for (const auto& item : split_list(v, ',')) {
                      const long long x = parse_integer("run.seeds", item);
                      if (x < 0) throw ConfigError("run.seeds: seeds must be >= 0");
                      c.seeds.push_back(static_cast<std::uint64_t>(x));
                    }
                  }}});
    return r;
  }();
  return reg;
}

const Field& find_field(const std::string& key) {
  for (const auto& [k, f] : registry()) {
    if (k == key) return f;
  }
  throw ConfigError(key + ": unknown configuration key");
}

}  // namespace

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

void ExperimentConfig::validate() const {
  auto wrap = [](const auto& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  };
  wrap([&] { data.validate(); });
  wrap([&] { engine.validate(); });
  if (!(split_ratio > 0.0 && split_ratio <= 1.0)) throw ConfigError("split.ratio: must lie in (0,1]");
  if (folds <= 0) throw ConfigError("split.folds: must be positive");
  if (seeds.empty()) throw ConfigError("run.seeds: at least one seed is required");
  if (engine.shape.classes != data.num_classes) {
    throw ConfigError("model.classes: must equal data.num_classes");
  }
  if (engine.shape.channels != 3) throw ConfigError("model.channels: images are RGB");
  if (data.height % engine.shape.pool != 0 || data.width % engine.shape.pool != 0) {
    throw ConfigError("model.pool: must divide data.height and data.width");
  }
  if (engine.shape.queries < data.max_objects()) {
    throw ConfigError("model.queries: must be at least the largest object count");
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : registry()) keys.push_back(k);
  return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, value);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  return find_field(key).get(cfg);
}

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : read_key_values(in)) set_config_value(cfg, k, v);
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : registry()) out += k + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace dcl
