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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcl/config.hpp"
#include "dcl/datagen.hpp"
#include "dcl/engine.hpp"
#include "dcl/metrics.hpp"

namespace dcl {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// FNV-1a over the serialized data.* keys, as 16 hex digits.
std::string dataset_hash(const DatasetConfig& cfg);

// Binary image block: "DCLIMG01", u32 count/height/width/channels, then
// little-endian float32 samples.
void write_images(const std::filesystem::path& path, const std::vector<Scene>& scenes);
std::vector<Image> read_images(const std::filesystem::path& path);

// manifest.txt plus {train,val,test}_images.bin and _labels.txt.
void write_dataset(const std::filesystem::path& dir, const DatasetConfig& cfg, const Benchmark& b);
// Throws IoError when files are missing or the manifest hash differs from cfg.
Benchmark read_dataset(const std::filesystem::path& dir, const DatasetConfig& cfg);

std::uint64_t fold_seed(const DatasetConfig& cfg, int fold);

// Labelled scenes, and unlabelled scenes with their labels removed.
struct SplitData {
  Split split;
  std::vector<Scene> labelled;
  std::vector<Scene> unlabelled;
};
SplitData make_split(const std::vector<Scene>& train, double ratio, std::uint64_t fold_seed);

struct RunOutcome {
  int fold = 0;
  std::uint64_t seed = 0;
  RunArtifacts artifacts;
  MetricsRecord test;  // eval model on the test split
};

// One (fold, seed) run on an in-memory benchmark.
RunOutcome run_experiment(const ExperimentConfig& cfg, const Benchmark& bench, int fold,
                          std::uint64_t seed);

bool is_supervised_baseline(const ExperimentConfig& cfg);

// File writers for run directories.
std::string history_csv(const std::vector<StepLog>& history);
void write_run_dir(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                   const SplitData& split, const RunOutcome& run);

struct Aggregate {
  int runs = 0;
  double map_mean = 0.0, map_std = 0.0;
  double ap50_mean = 0.0, ap50_std = 0.0;
  double ap75_mean = 0.0, ap75_std = 0.0;
};
// Means and sample standard deviations in points.
Aggregate aggregate(const std::vector<RunOutcome>& runs);

// Subcommands. Each returns the directory it wrote.
std::filesystem::path cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out);
std::filesystem::path cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs);
std::filesystem::path cmd_analyze(const std::filesystem::path& run_dir,
                                  const std::filesystem::path& dataset_dir);
std::filesystem::path cmd_ablate(const std::filesystem::path& grid_path,
                                 const std::filesystem::path& out, int jobs,
                                 const std::vector<std::uint64_t>& seeds_override, int folds_override);

}  // namespace dcl
