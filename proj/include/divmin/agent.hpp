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

// One self-imitation learner: policy, two value baselines, discriminator and
// elite replay, driven one phase at a time so that an ensemble can interleave
// several agents with identical arithmetic to a solo run.

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "divmin/ppo.hpp"
#include "divmin/replay.hpp"

namespace divmin {

/// Baselines for the env-reward and shaped-reward streams.
struct ValueFunctionPair {
  Mlp env;
  Mlp shaped;
};

/// Per-stream advantages and regression targets for one batch.
struct AdvantageEstimates {
  Vec env;
  Vec shaped;
  Vec env_targets;
  Vec shaped_targets;
};

struct IterationStats {
  int iteration = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double observed_return_mean = 0.0;
  double success_rate = 0.0;
  double goal_fraction = 0.0;
  double js_estimate = std::numeric_limits<double>::quiet_NaN();
  double shaped_reward_mean = 0.0;
  double replay_threshold = -std::numeric_limits<double>::infinity();
  int replay_size = 0;
  double log_std_mean = 0.0;
  int rejected_steps = 0;
};

/// Stream tags for derive_seed.
enum class SeedStream : std::uint64_t {
  kInit = 1,
  kRollout = 2,
  kShuffle = 3,
  kDiscriminator = 4,
  kExplore = 5,
  kNoiseMask = 6,
  kEval = 7,
  kDensity = 8,
};

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream s) {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

class SelfImitationAgent {
 public:
  /// self_imitation = false gives plain PPO: no discriminator, no replay, and
  /// the shaped stream is identically zero.
  SelfImitationAgent(const Env& env, const PPOConfig& cfg, bool self_imitation,
                     std::uint64_t seed);

  // Phase 1: gather a batch with the current policy and discriminator and
  // offer every episode to the replay.
  void collect();
  // Phase 2: advantages for both streams and the minibatch schedule.
  void prepare_update();
  int minibatch_count() const { return static_cast<int>(minibatches_.size()) / cfg_.epochs; }
  /// (1 - nu) g1 + nu g2 on the given minibatch, an ascent direction.
  Vec driving_gradient(int epoch, int mb) const;
  /// Clipped-surrogate gradient of the extra streams weighted by coeffs.
  Vec extra_stream_gradient(int epoch, int mb, std::span<const double> coeffs) const;
  /// Adam ascent along direction. Non-finite directions are rejected.
  AdamOutcome apply_direction(const Vec& direction);
  void regress_values(int epoch, int mb);
  // Phase 3.
  void update_discriminator();

  /// Extra reward streams (one per other ensemble member) over the current
  /// batch, normalised like the main streams. Their baselines share one
  /// network with a head per stream.
  void set_extra_streams(const std::vector<Vec>& rewards);
  /// Drops the extra streams for this iteration (their baselines still exist).
  void clear_extra_streams() { extra_adv_.clear(); extra_targets_.clear(); }

  IterationStats finish_iteration();

  const GaussianPolicy& policy() const { return policy_; }
  GaussianPolicy& policy() { return policy_; }
  const ValueFunctionPair& values() const { return values_; }
  const Discriminator* discriminator() const { return disc_ ? disc_.get() : nullptr; }
  const PriorityReplay& replay() const { return replay_; }
  const RolloutBatch& batch() const { return batch_; }
  const AdvantageEstimates& advantages() const { return adv_; }
  const PPOConfig& config() const { return cfg_; }
  /// Baseline network of the extra streams; null before the first call to
  /// set_extra_streams.
  const Mlp* extra_values() const { return extra_values_ ? &*extra_values_ : nullptr; }
  bool self_imitation() const { return self_imitation_; }
  int iteration() const { return iteration_; }
  Env& env() { return *env_; }

 private:
  struct Minibatch {
    Mat states;
    Mat actions;
    Vec old_log_probs;
    Vec adv_env;
    Vec adv_shaped;
    Vec env_targets;
    Vec shaped_targets;
    std::vector<Eigen::Index> rows;
  };
  const Minibatch& minibatch(int epoch, int mb) const;

  PPOConfig cfg_;
  bool self_imitation_;
  std::uint64_t seed_;
  std::unique_ptr<Env> env_;
  Rng rollout_rng_;
  Rng shuffle_rng_;
  Rng disc_rng_;
  Rng explore_rng_;
  GaussianPolicy policy_;
  AdamState policy_opt_;
  ValueFunctionPair values_;
  AdamState env_value_opt_;
  AdamState shaped_value_opt_;
  std::unique_ptr<Discriminator> disc_;
  PriorityReplay replay_;
  std::optional<Mlp> extra_values_;
  std::optional<AdamState> extra_value_opt_;

  RolloutBatch batch_;
  AdvantageEstimates adv_;
  std::vector<Vec> extra_adv_;
  std::vector<Vec> extra_targets_;
  std::vector<Minibatch> minibatches_;
  IterationStats stats_;
  int iteration_ = 0;
};

struct TrainResult {
  GaussianPolicy policy;
  std::vector<IterationStats> history;
  std::unique_ptr<SelfImitationAgent> agent;
};

using IterationObserver = std::function<void(const IterationStats&)>;

/// Runs the full self-imitation loop (or plain PPO) for cfg.iterations.
TrainResult train_self_imitation(const Env& env, const PPOConfig& cfg, std::uint64_t seed,
                                 bool self_imitation = true,
                                 const IterationObserver& observer = {});

/// Mean of the last ceil(10%) of the per-iteration mean returns.
double final_window_score(const std::vector<IterationStats>& history);

}  // namespace divmin
