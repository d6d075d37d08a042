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

#include <gtest/gtest.h>

#include <sstream>

namespace dcl {
namespace {

TEST(Config, DefaultsMatchPolicyBundle) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.engine.policy, PolicyBundle{});
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(get_config_value(cfg, "policy.sigma.shape"), "arctan");
  EXPECT_EQ(get_config_value(cfg, "policy.momentum.end"), "0.99980000000000002");
}

TEST(Config, ShippedDefaultFileMatchesDefaults) {
  EXPECT_EQ(load_config(std::string(DCL_SOURCE_DIR) + "/configs/default.cfg"), ExperimentConfig{});
}

TEST(Config, RoundTripIsIdentity) {
  ExperimentConfig cfg;
  cfg.data.count_probs = {0.25, 0.25, 0.5};
  cfg.data.palette = {{0.1, 0.2, 0.3}, {0.7, 0.8, 0.9}};
  cfg.engine.policy.sigma = Schedule::linear(0.3, 0.5);
  cfg.engine.lr = 1.0 / 3.0;
  cfg.engine.init = InitMode::kRandom;
  cfg.engine.ema = EmaMode::kEpoch;
  cfg.seeds = {4, 9};
  const std::string text = serialize_config(cfg);
  const ExperimentConfig back = parse_config_text(text);
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(serialize_config(back), text);
}

TEST(Config, EveryKeyRoundTrips) {
  const ExperimentConfig cfg;
  for (const auto& key : config_keys()) {
    ExperimentConfig other;
    set_config_value(other, key, get_config_value(cfg, key));
    EXPECT_EQ(other, cfg) << key;
  }
}

TEST(Config, ParsesCommentsAndOverrides) {
  const auto cfg = parse_config_text(
      "# experiment\n"
      "train.epochs = 40\n"
      "\n"
      "policy.alpha.shape = constant   \n"
      "policy.alpha.start = 0.5\n"
      "train.epochs = 50\n");
  EXPECT_EQ(cfg.engine.epochs, 50);
  EXPECT_EQ(cfg.engine.policy.alpha.shape, ScheduleShape::kConstant);
  EXPECT_EQ(cfg.engine.policy.alpha.v_start, 0.5);
}

TEST(Config, ErrorsNameTheKey) {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("train.epochs = ten\n").find("train.epochs"), std::string::npos);
  EXPECT_NE(message("no.such.key = 1\n").find("no.such.key"), std::string::npos);
  EXPECT_NE(message("policy.pi.shape = zigzag\n").find("policy.pi"), std::string::npos);
  EXPECT_NE(message("just some words\n").find("line 1"), std::string::npos);
}

TEST(Config, ValidationCatchesCrossFieldProblems) {
  ExperimentConfig cfg;
  cfg.engine.shape.pool = 5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.engine.shape.classes = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.seeds.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.engine.policy.sigma = Schedule::constant(1.2);
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, MissingFileIsIoFailure) {
  EXPECT_THROW(load_config("/nonexistent/dir/config.txt"), std::ios_base::failure);
}

TEST(Config, KeyValuesKeepOrderAndExtras) {
  std::istringstream in("a.b = 1\n# c\ncell.x.train.epochs = 3\n");
  const auto kv = read_key_values(in);
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[1].first, "cell.x.train.epochs");
  EXPECT_EQ(kv[1].second, "3");
  EXPECT_EQ(trim("  x y \t"), "x y");
}

}  // namespace
}  // namespace dcl
