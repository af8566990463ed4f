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

#include <vector>

#include "divmin/adam.hpp"
#include "divmin/mlp.hpp"
#include "divmin/replay.hpp"

namespace divmin {

inline constexpr double kProbClip = 1e-6;

/// Balanced binary log-loss of a logit network: the mean of softplus(-z) over
/// positive rows plus the mean of softplus(z) over negative rows. Writes the
/// parameter gradient when grad is non-null.
double logistic_loss(const Mlp& net, const Mat& positive, const Mat& negative, Vec* grad);

/// Trains a logit network with Adam on minibatches drawn from the two classes.
/// One epoch covers the larger class once. Returns the mean loss per epoch.
std::vector<double> train_logistic(Mlp& net, AdamState& opt, const Mat& positive,
                                   const Mat& negative, int epochs, int minibatch, Rng& rng);

struct DiscriminatorConfig {
  int hidden = 64;
  double lr = 1e-4;
  int minibatch = 64;
  int epochs = 3;
};

/// Classifier on concatenated (state, action) whose output probability is
/// read as r(s,a) = d_pi / (d_pi + d_E): current-policy pairs are the positive
/// class, replay pairs the negative class.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(int state_dim, int action_dim, DiscriminatorConfig cfg, Rng& init_rng);

  /// Clamped probabilities in [kProbClip, 1 - kProbClip] for feature rows.
  Vec probabilities(const Mat& features) const;
  double probability(const Vec& state, const Vec& action) const;

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  AdamState& optimizer() { return opt_; }
  const DiscriminatorConfig& config() const { return cfg_; }
  /// Number of completed training calls that updated the parameters.
  int updates() const { return updates_; }
  void mark_updated() { ++updates_; }

 private:
  DiscriminatorConfig cfg_;
  Mlp net_;
  AdamState opt_;
  int updates_ = 0;
};

/// Updates the discriminator on the two batches. An empty replay batch skips
/// the update and returns an empty trace.
std::vector<double> train_discriminator(Discriminator& disc, const PairBatch& policy_pairs,
                                        const PairBatch& replay_pairs, int epochs, Rng& rng);

/// -log r(s,a).
double shaped_reward(const Discriminator& disc, const Vec& state, const Vec& action);
Vec shaped_rewards(const Discriminator& disc, const Mat& features);

/// Half of (log 4 + mean log r over policy pairs + mean log(1 - r) over
/// replay pairs), the variational lower bound on JS in nats,
/// clipped to [0, log 2].
double js_estimate(const Discriminator& disc, const PairBatch& policy_pairs,
                   const PairBatch& replay_pairs);

}  // namespace divmin
