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

// Stein-variational ensemble of self-imitation agents with a Jensen-Shannon
// kernel between their state-action visitation distributions.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "divmin/agent.hpp"

namespace divmin {

/// Axis-aligned box over state-action features, grown to cover every batch it
/// sees and padded on each side. Serves as the shared uniform reference.
class ReferenceBox {
 public:
  explicit ReferenceBox(double pad_fraction = 0.05, double min_pad = 1e-3)
      : pad_fraction_(pad_fraction), min_pad_(min_pad) {}
  void include(const Mat& features);
  bool empty() const { return lo_.size() == 0; }
  /// Padded bounds; throws ContractViolation when the box has zero volume.
  Vec lower() const;
  Vec upper() const;
  Mat sample(Eigen::Index rows, Rng& rng) const;

 private:
  double pad_fraction_;
  double min_pad_;
  Vec lo_;
  Vec hi_;
};

struct DensityConfig {
  int hidden = 64;
  double lr = 1e-3;
  int epochs = 3;
  int minibatch = 64;
};

/// Logistic model of one agent's state-action pairs against the shared
/// reference. Its logit is the log density up to a constant common to all
/// agents.
class DensityModel {
 public:
  DensityModel() = default;
  DensityModel(int feature_dim, const DensityConfig& cfg, Rng& init_rng);
  Vec logits(const Mat& features) const;
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  AdamState& optimizer() { return opt_; }
  const DensityConfig& config() const { return cfg_; }

 private:
  DensityConfig cfg_;
  Mlp net_;
  AdamState opt_;
};

/// Agent pairs are the positive class, an equal number of reference draws the
/// negative class. Returns the per-epoch loss trace.
std::vector<double> fit_density_model(DensityModel& model, const Mat& agent_features,
                                      const ReferenceBox& reference, int epochs, Rng& rng);

/// r_ij = sigmoid(log rho_i - log rho_j), clamped to [1e-6, 1 - 1e-6].
Vec pair_ratio(const Vec& logits_i, const Vec& logits_j);
Vec pair_ratio(const DensityModel& psi_i, const DensityModel& psi_j, const Mat& features);

/// log r_ij.
Vec exploration_reward(const Vec& logits_i, const Vec& logits_j);
Vec exploration_reward(const DensityModel& psi_i, const DensityModel& psi_j, const Mat& features);

struct KernelEstimate {
  Mat divergence;  // symmetrised, clipped JS estimates
  Mat kernel;      // exp(-divergence / T), unit diagonal
};

/// logits[j][i] holds model j evaluated on agent i's eval batch.
KernelEstimate kernel_from_logits(const std::vector<std::vector<Vec>>& logits, double temperature);
KernelEstimate kernel_matrix(const std::vector<DensityModel>& models,
                             const std::vector<Mat>& eval_features, double temperature);

/// Delta_i = (1/n) sum_j [ k(j,i) driving_j + alpha (k(j,i) / T) repulsion[i][j] ], where
/// repulsion[i][j] is the policy gradient of agent i on the log r_ij stream.
/// Diagonal repulsion entries are ignored and may be empty.
std::vector<Vec> svpg_delta(const std::vector<Vec>& driving,
                            const std::vector<std::vector<Vec>>& repulsion, const Mat& kernel,
                            double alpha, double temperature);

/// Squared-distance kernel over flat parameters with the median-heuristic
/// bandwidth h = med^2 / log(n + 1).
Mat rbf_kernel(const std::vector<Vec>& params, double* bandwidth = nullptr);
/// sum_j grad_{theta_j} k(theta_j, theta_i) for the RBF kernel.
std::vector<Vec> rbf_repulsion(const std::vector<Vec>& params, const Mat& kernel, double bandwidth);

enum class EnsembleMode { kInteractJS, kInteractRBF, kIndependent };

struct EnsembleConfig {
  int agents = 8;
  double temperature = 0.5;
  double alpha0 = 10.0;
  /// Fraction of the run after which alpha stays at zero.
  double alpha_decay_end = 0.8;
  EnsembleMode mode = EnsembleMode::kInteractJS;
  PPOConfig ppo;
  DensityConfig density;
  /// Worker threads for the per-agent phases; results do not depend on it.
  int workers = 1;

  void validate() const;
  /// alpha at 0-based iteration t.
  double alpha_at(int t) const;
};

struct EnsembleIteration {
  std::vector<IterationStats> agents;
  Mat kernel;          // JS kernel measured on this iteration's batches
  Mat applied_kernel;  // kernel used in the update
  double alpha = 0.0;
  double kernel_offdiag_mean = 1.0;
  double kernel_offdiag_min = 1.0;
  int zeroed_agents = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>(std::uint64_t agent_seed)>;

struct EnsembleResult {
  std::vector<std::unique_ptr<SelfImitationAgent>> agents;
  std::vector<DensityModel> density_models;
  std::vector<EnsembleIteration> history;
};

/// Seed of agent i in an ensemble seeded with seed. Hashed rather than
/// seed + i so that ensembles with neighbouring seeds share no agents.
inline std::uint64_t agent_seed(std::uint64_t seed, int i) {
  return derive_seed(derive_seed(seed, 0x5e4b1e), static_cast<std::uint64_t>(i));
}

/// Iteration hook called after each iteration (metrics streaming).
using EnsembleObserver = std::function<void(const EnsembleIteration&)>;

EnsembleResult train_ensemble(const EnvFactory& make_env, const EnsembleConfig& cfg,
                              std::uint64_t seed, const EnsembleObserver& observer = {});

std::string to_string(EnsembleMode mode);

}  // namespace divmin
