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

#include <memory>
#include <string>
#include <vector>

#include "divmin/trajectory.hpp"

namespace divmin {

struct StepResult {
  Vec observation;
  /// Reward as emitted to the agent (after any wrappers).
  double reward = 0.0;
  bool done = false;
  /// Reward of the underlying task before wrappers; used for reporting only.
  double true_reward = 0.0;
  /// Environment-specific goal event: chain past the threshold, maze inside the
  /// green region, bandit pulled the better arm.
  bool goal = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual int horizon() const = 0;
  /// Starts an episode. The environment draws any internal randomness for the
  /// episode from a stream seeded off rng.
  virtual Vec reset(Rng& rng) = 0;
  /// Throws ContractViolation when called after the episode finished.
  virtual StepResult step(const Vec& action) = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

// ---------------------------------------------------------------------------
// Maze: unit square split by a vertical wall with a gap at the top.

struct MazeSpec {
  double wall_x = 0.5;
  double wall_top = 0.7;  // wall spans y in [0, wall_top]
  double start_x = 0.25;
  double start_y = 0.25;
  double start_sigma = 0.01;
  double red_x = 0.25;
  double red_y = 0.6;
  double red_radius = 0.1;
  double red_reward = 1.0;
  double green_x = 0.75;
  double green_y = 0.25;
  double green_radius = 0.1;
  double green_reward = 10.0;
  double max_speed = 0.05;
  double motion_sigma = 0.005;
  int horizon = 250;
};

class MazeEnv final : public Env {
 public:
  explicit MazeEnv(MazeSpec spec = {});
  int obs_dim() const override { return 2; }
  int act_dim() const override { return 2; }
  int horizon() const override { return spec_.horizon; }
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<MazeEnv>(*this); }

  const MazeSpec& spec() const { return spec_; }
  double x() const { return x_; }
  double y() const { return y_; }
  /// Places the agent (tests and probes).
  void set_position(double x, double y) { x_ = x; y_ = y; }
  bool in_green(double x, double y) const;
  bool in_red(double x, double y) const;
  /// True when the straight move (x0,y0)->(x1,y1) touches the wall segment.
  bool crosses_wall(double x0, double y0, double x1, double y1) const;

 private:
  MazeSpec spec_;
  double x_ = 0.0;
  double y_ = 0.0;
  int t_ = 0;
  bool done_ = true;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Two-armed Bernoulli bandit. The single action coordinate selects arm 2 when
// it is non-negative.

struct BanditSpec {
  double p = 0.45;
  double epsilon = 0.1;
};

class BanditEnv final : public Env {
 public:
  explicit BanditEnv(BanditSpec spec = {});
  int obs_dim() const override { return 1; }
  int act_dim() const override { return 1; }
  int horizon() const override { return 1; }
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<BanditEnv>(*this); }
  const BanditSpec& spec() const { return spec_; }

 private:
  BanditSpec spec_;
  bool done_ = true;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// One-dimensional sparse chain: reward only once the position passes the goal
// distance, plus a quadratic action cost at every step.

struct SparseChainSpec {
  double goal_distance = 1.0;
  double goal_reward = 1.0;
  double energy_cost = 0.001;
  double step_scale = 0.05;
  /// Fraction of the velocity kept from one step to the next. The terminal
  /// speed under a constant action a is step_scale * a.
  double momentum = 0.0;
  int horizon = 100;
};

class SparseChainEnv final : public Env {
 public:
  explicit SparseChainEnv(SparseChainSpec spec = {});
  /// Observation is (position, velocity / step_scale, t / horizon).
  int obs_dim() const override { return 3; }
  int act_dim() const override { return 1; }
  int horizon() const override { return spec_.horizon; }
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<SparseChainEnv>(*this); }
  const SparseChainSpec& spec() const { return spec_; }
  double position() const { return x_; }

 private:
  Vec observe() const;

  SparseChainSpec spec_;
  double x_ = 0.0;
  double v_ = 0.0;
  int t_ = 0;
  bool done_ = true;
};

// ---------------------------------------------------------------------------
// Reward wrappers.

/// Emits zero reward until the final step, which carries the episode's sum.
class EpisodicReward final : public Env {
 public:
  explicit EpisodicReward(std::unique_ptr<Env> inner) : inner_(std::move(inner)) {}
  int obs_dim() const override { return inner_->obs_dim(); }
  int act_dim() const override { return inner_->act_dim(); }
  int horizon() const override { return inner_->horizon(); }
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;
  std::unique_ptr<Env> clone() const override;

 private:
  std::unique_ptr<Env> inner_;
  double accumulated_ = 0.0;
};

/// Multiplies each step's reward by an independent Bernoulli(1 - p_m) mask.
class NoisyReward final : public Env {
 public:
  NoisyReward(std::unique_ptr<Env> inner, double p_m, Rng& rng);
  int obs_dim() const override { return inner_->obs_dim(); }
  int act_dim() const override { return inner_->act_dim(); }
  int horizon() const override { return inner_->horizon(); }
  Vec reset(Rng& rng) override;
  StepResult step(const Vec& action) override;
  std::unique_ptr<Env> clone() const override;
  double p_m() const { return p_m_; }

 private:
  NoisyReward(const NoisyReward& other);

  std::unique_ptr<Env> inner_;
  double p_m_;
  Rng rng_;
};

std::unique_ptr<Env> wrap_episodic(std::unique_ptr<Env> env);
std::unique_ptr<Env> wrap_noisy(std::unique_ptr<Env> env, double p_m, Rng& rng);

// ---------------------------------------------------------------------------

enum class EnvKind { kMaze, kBandit, kChain };
enum class RewardMode { kDense, kEpisodic, kNoisy };

struct EnvConfig {
  EnvKind kind = EnvKind::kChain;
  RewardMode reward_mode = RewardMode::kDense;
  double p_m = 0.0;
  MazeSpec maze;
  BanditSpec bandit;
  SparseChainSpec chain;
};

/// Builds the configured environment with its reward wrapper. The noisy
/// wrapper's mask stream is seeded from mask_seed.
std::unique_ptr<Env> make_env(const EnvConfig& cfg, std::uint64_t mask_seed);

/// Normalised occupancy over a resolution x resolution grid of the first two
/// state coordinates (a missing second coordinate reads as 0). Rows index y,
/// columns index x; states outside [lo, hi] fall into the edge cells.
Mat visitation_histogram(const std::vector<Trajectory>& trajectories, int resolution,
                         double lo = 0.0, double hi = 1.0);

}  // namespace divmin
