// Copyright 2026 The divmin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Experiment configuration: a versioned key = value text file.
//
//   # comment
//   version = 1
//   algorithm = si
//   env = chain
//   reward = episodic
//   ppo.nu = 0.8
//
// Unknown keys, malformed values and a missing or unsupported version are
// rejected with the offending line and key.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "divmin/cem.hpp"
#include "divmin/svpg.hpp"

namespace divmin {

inline constexpr int kConfigVersion = 1;

enum class Algorithm { kPPO, kSI, kInteractJS, kInteractRBF, kIndependent, kCEM };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& message);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kSI;
  std::uint64_t seed = 0;
  std::string output = "run";
  EnvConfig env;
  /// PPO settings live inside the ensemble block and are shared by every
  /// algorithm that trains a policy by gradient.
  EnsembleConfig ensemble;
  CemConfig cem;
  int cem_episodes = 1;
  int eval_episodes = 20;
  int heatmap_resolution = 20;

  PPOConfig& ppo() { return ensemble.ppo; }
  const PPOConfig& ppo() const { return ensemble.ppo; }
  bool is_ensemble() const;
  void validate() const;
};

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies one key = value setting; line is used for diagnostics only.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      int line = 0);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);
/// Every key with its current value, round-trippable through parse_config.
std::string format_config(const ExperimentConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace divmin
