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

#include "divmin/mlp.hpp"

namespace divmin {

/// Diagonal Gaussian policy: MLP mean and a state-independent log standard
/// deviation. The flat parameter layout is [mean_net params, log_std].
class GaussianPolicy {
 public:
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;

  GaussianPolicy() = default;
  GaussianPolicy(Mlp mean_net, Vec log_std);

  /// Xavier init with the mean head scaled down by 0.01.
  static GaussianPolicy init(int obs_dim, int act_dim, int hidden, Rng& rng,
                             double init_log_std);

  int obs_dim() const { return mean_net_.shape().in; }
  int act_dim() const { return mean_net_.shape().out; }
  const Mlp& mean_net() const { return mean_net_; }
  const Vec& log_std() const { return log_std_; }
  void set_log_std(const Vec& log_std);

  Vec mean(const Vec& state) const { return mean_net_.forward(state); }

  std::size_t param_count() const;
  Vec flat() const;
  /// Copies a flat parameter vector in; log_std is clamped to its range.
  void set_flat(const Vec& flat);

 private:
  Mlp mean_net_;
  Vec log_std_;
};

double gaussian_log_prob(const GaussianPolicy& policy, const Vec& state, const Vec& action);

/// mean + exp(log_std) * z with z ~ N(0, I).
Vec gaussian_sample(const GaussianPolicy& policy, const Vec& state, Rng& rng);

struct LogProbCache {
  MlpCache mlp;
  Mat mean;
};

/// Log densities of a batch of (state, action) rows.
Vec gaussian_log_prob_batch(const GaussianPolicy& policy, const Mat& states,
                            const Mat& actions, LogProbCache* cache = nullptr);

/// Gradient of sum_k weights[k] * log pi(a_k | s_k) in the flat layout.
Vec gaussian_log_prob_grad(const GaussianPolicy& policy, const LogProbCache& cache,
                           const Mat& actions, const Vec& weights);

}  // namespace divmin
