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

// Policy-gradient machinery: rollout collection, generalized advantage
// estimation, the clipped surrogate and value regression.

#include <span>
#include <vector>

#include "divmin/adam.hpp"
#include "divmin/discriminator.hpp"
#include "divmin/env.hpp"
#include "divmin/gaussian.hpp"

namespace divmin {

struct PPOConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs = 5;
  int minibatch = 64;
  double lr = 1e-4;
  double value_lr = 1e-3;
  /// Weight of the self-imitation gradient; 0 is plain PPO on env rewards.
  double nu = 0.8;
  int iterations = 200;
  int batch_episodes = 8;
  std::size_t capacity = 10;
  int hidden = 64;
  double init_log_std = 0.0;
  DiscriminatorConfig disc;

  void validate() const;
};

struct GaeResult {
  Vec advantages;
  Vec targets;
};

/// delta_t = r_t + gamma V_{t+1} - V_t with V_T = bootstrap,
/// A_t = sum_k (gamma lambda)^k delta_{t+k}, targets = A + V.
GaeResult compute_gae(const Vec& rewards, const Vec& values, double bootstrap, double gamma,
                      double lambda);

/// Centres and scales to unit standard deviation; leaves the vector untouched
/// when its standard deviation is below 1e-8.
void normalize_advantages(Vec& adv);

/// Mean of min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A).
double clipped_surrogate(const Vec& ratio, const Vec& adv, double clip);

/// Derivative of each sample's clipped-surrogate term with respect to its log
/// probability: A * ratio where the unclipped branch is active, else 0.
Vec surrogate_weights(const Vec& ratio, const Vec& adv, double clip);

/// All transitions gathered in one iteration, episodes concatenated.
struct RolloutBatch {
  Mat states;
  Mat actions;
  Vec env_rewards;     // r1, as observed through the reward wrapper
  Vec shaped_rewards;  // r2 = -log r(s,a) from the discriminator at collection time
  Vec log_probs;       // behaviour policy
  Vec true_rewards;
  std::vector<std::uint8_t> dones;
  std::vector<std::uint8_t> goals;
  std::vector<Eigen::Index> episode_starts;  // size = episodes + 1
  std::vector<double> true_returns;
  std::vector<double> observed_returns;
  std::vector<std::uint8_t> episode_reached_goal;
  std::vector<Trajectory> trajectories;

  Eigen::Index size() const { return states.rows(); }
  int episodes() const { return static_cast<int>(true_returns.size()); }
  PairBatch pairs() const { return {states, actions}; }
};

/// Rolls out `episodes` episodes with the stochastic policy. Shaped rewards are
/// filled from disc when given, else zero.
RolloutBatch collect_rollouts(Env& env, const GaussianPolicy& policy, const Discriminator* disc,
                              int episodes, Rng& rng);

/// GAE over each episode of the batch for one reward stream, bootstrapping 0 at
/// episode ends.
GaeResult batch_gae(const RolloutBatch& batch, const Vec& rewards, const Vec& values,
                    double gamma, double lambda);

/// Ascent direction sum_s coeff_s * grad(clipped surrogate with A_s), averaged
/// over the minibatch rows. Streams with a zero coefficient still contribute
/// coeff * weight terms so the result is exactly linear in the coefficients.
Vec stream_policy_gradient(const GaussianPolicy& policy, const Mat& states, const Mat& actions,
                           const Vec& old_log_probs, std::span<const Vec* const> advantages,
                           std::span<const double> coeffs, double clip);

/// (1 - nu) g1 + nu g2 for the env and shaped advantage streams.
Vec interpolated_policy_gradient(const GaussianPolicy& policy, const Mat& states,
                                 const Mat& actions, const Vec& old_log_probs,
                                 const Vec& adv_env, const Vec& adv_shaped, double nu,
                                 double clip);

/// 0.5 * mean (V(s) - target)^2 and its gradient.
double value_loss(const Mlp& value, const Mat& states, const Vec& targets, Vec* grad);

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;
  double success_rate = 0.0;
  double goal_fraction = 0.0;
  std::vector<Trajectory> trajectories;
};

/// Runs the stochastic policy and reports true (unwrapped) returns.
EvalResult evaluate_policy(Env& env, const GaussianPolicy& policy, int episodes, Rng& rng);

}  // namespace divmin
