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
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcl/datagen.hpp"
#include "dcl/engine.hpp"

namespace dcl {

// Raised for malformed or invalid configuration; the message names the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  DatasetConfig data;
  double split_ratio = 0.1;  // labelled fraction of the train split
  int folds = 3;
  EngineConfig engine;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  // Throws ConfigError with the offending key.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Every key in canonical order.
std::vector<std::string> config_keys();

// Sets one dotted key from its text value. Throws ConfigError on an unknown
// key or a value that does not parse.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

// "key = value" lines; '#' starts a comment. Later lines override earlier ones.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// All keys, one per line, in canonical order.
std::string serialize_config(const ExperimentConfig& cfg);

// Raw key/value pairs in file order, for grids that carry extra keys.
std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in);

// Strips leading and trailing whitespace.
std::string trim(const std::string& s);

}  // namespace dcl
