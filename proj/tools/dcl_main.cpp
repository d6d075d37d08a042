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

// Command-line front end: generate, train, analyze, ablate.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcl/config.hpp"
#include "dcl/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitRuntime = 4;

std::filesystem::path default_out() {
  if (const char* env = std::getenv("DCL_OUT"); env != nullptr && *env != '\0') return env;
  return "dcl_out";
}

dcl::ExperimentConfig load(const std::string& path) {
  return path.empty() ? dcl::ExperimentConfig{} : dcl::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic curriculum semi-supervised detection on synthetic scenes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds_arg;
  int folds = 0;
  int jobs = 1;
  std::string run_dir;
  std::string data_dir;

  auto* gen = app.add_subcommand("generate", "Render the synthetic benchmark into <out>/dataset");
  gen->add_option("--config", config_path, "Experiment config file");
  gen->add_option("--out", out_dir, "Output root (default: $DCL_OUT or ./dcl_out)");

  auto* train = app.add_subcommand("train", "Train every (fold, seed) run into <out>/train");
  train->add_option("--config", config_path, "Experiment config file");
  train->add_option("--out", out_dir, "Output root holding dataset/");
  train->add_option("--seeds", seeds_arg, "Comma-separated seeds overriding run.seeds");
  train->add_option("--folds", folds, "Number of data folds overriding split.folds")->check(CLI::PositiveNumber);
  train->add_option("--jobs", jobs, "Runs to execute in parallel")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Pseudo-label analysis of a run directory");
  analyze->add_option("--run", run_dir, "Run directory containing checkpoints")->required();
  analyze->add_option("--data", data_dir, "Dataset directory (default: <out>/dataset)");
  analyze->add_option("--out", out_dir, "Output root used to locate dataset/");

  auto* ablate = app.add_subcommand("ablate", "Run an ablation grid into <out>/ablate");
  ablate->add_option("--config", config_path, "Grid file: base keys plus cell.<name>.<key> overrides")
      ->required();
  ablate->add_option("--out", out_dir, "Output root holding dataset/");
  ablate->add_option("--seeds", seeds_arg, "Comma-separated seeds overriding run.seeds");
  ablate->add_option("--folds", folds, "Number of data folds overriding split.folds")->check(CLI::PositiveNumber);
  ablate->add_option("--jobs", jobs, "Runs to execute in parallel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  const std::filesystem::path out = out_dir.empty() ? default_out() : std::filesystem::path(out_dir);
  try {
    std::vector<std::uint64_t> seeds;
    if (!seeds_arg.empty()) {
      dcl::ExperimentConfig tmp;
      dcl::set_config_value(tmp, "run.seeds", seeds_arg);
      seeds = tmp.seeds;
    }
    if (*gen) {
      const auto cfg = load(config_path);
      std::cout << "dataset written to " << dcl::cmd_generate(cfg, out).string() << "\n";
    } else if (*train) {
      auto cfg = load(config_path);
      if (!seeds.empty()) cfg.seeds = seeds;
      if (folds > 0) cfg.folds = folds;
      std::cout << "runs written to " << dcl::cmd_train(cfg, out, jobs).string() << "\n";
    } else if (*analyze) {
      const std::filesystem::path data = data_dir.empty() ? out / "dataset" : std::filesystem::path(data_dir);
      std::cout << "analysis written to " << dcl::cmd_analyze(run_dir, data).string() << "\n";
    } else if (*ablate) {
      std::cout << "ablation written to " << dcl::cmd_ablate(config_path, out, jobs, seeds, folds).string()
                << "\n";
    }
  } catch (const dcl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dcl::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
