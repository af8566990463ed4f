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

#include "divmin/env.hpp"

#include <cmath>

namespace divmin {

// ---------------------------------------------------------------------------
// Maze

MazeEnv::MazeEnv(MazeSpec spec) : spec_(spec) {
  require(spec.horizon > 0, "maze: horizon must be positive");
  require(spec.max_speed > 0.0, "maze: max_speed must be positive");
}

bool MazeEnv::in_green(double x, double y) const {
  const double dx = x - spec_.green_x, dy = y - spec_.green_y;
  return dx * dx + dy * dy <= spec_.green_radius * spec_.green_radius;
}

bool MazeEnv::in_red(double x, double y) const {
  const double dx = x - spec_.red_x, dy = y - spec_.red_y;
  return dx * dx + dy * dy <= spec_.red_radius * spec_.red_radius;
}

bool MazeEnv::crosses_wall(double x0, double y0, double x1, double y1) const {
  const bool left0 = x0 < spec_.wall_x;
  const bool left1 = x1 < spec_.wall_x;
  if (left0 == left1) return false;
  const double t = (spec_.wall_x - x0) / (x1 - x0);
  const double yc = y0 + t * (y1 - y0);
  return yc <= spec_.wall_top;
}

Vec MazeEnv::reset(Rng& rng) {
  rng_.seed(rng());
  x_ = clamp(spec_.start_x + spec_.start_sigma * standard_normal(rng_), 0.0, 1.0);
  y_ = clamp(spec_.start_y + spec_.start_sigma * standard_normal(rng_), 0.0, 1.0);
  t_ = 0;
  done_ = false;
  Vec o(2);
  o << x_, y_;
  return o;
}

StepResult MazeEnv::step(const Vec& action) {
  require(!done_, "maze: step called after episode end");
  require(action.size() == 2, "maze: action must be 2-dimensional");
  const double vx = spec_.max_speed * clamp(action[0], -1.0, 1.0);
  const double vy = spec_.max_speed * clamp(action[1], -1.0, 1.0);
  double nx = clamp(x_ + vx + spec_.motion_sigma * standard_normal(rng_), 0.0, 1.0);
  double ny = clamp(y_ + vy + spec_.motion_sigma * standard_normal(rng_), 0.0, 1.0);
  if (crosses_wall(x_, y_, nx, ny)) {
    // Stop at the wall surface on the side the move started from; keep sliding in y.
    nx = x_ < spec_.wall_x ? spec_.wall_x - 1e-6 : spec_.wall_x;
  }
  x_ = nx;
  y_ = ny;
  ++t_;
  done_ = t_ >= spec_.horizon;

  StepResult r;
  r.observation = Vec(2);
  r.observation << x_, y_;
  r.goal = in_green(x_, y_);
  r.true_reward = r.goal ? spec_.green_reward : (in_red(x_, y_) ? spec_.red_reward : 0.0);
  r.reward = r.true_reward;
  r.done = done_;
  return r;
}

// ---------------------------------------------------------------------------
// Bandit

BanditEnv::BanditEnv(BanditSpec spec) : spec_(spec) {
  require(spec.p >= 0.0 && spec.epsilon >= 0.0 && spec.p + spec.epsilon <= 1.0,
          "bandit: need 0 <= p <= p + epsilon <= 1");
}

Vec BanditEnv::reset(Rng& rng) {
  rng_.seed(rng());
  done_ = false;
  return Vec::Ones(1);
}

StepResult BanditEnv::step(const Vec& action) {
  require(!done_, "bandit: step called after episode end");
  require(action.size() == 1, "bandit: action must be 1-dimensional");
  const bool second = action[0] >= 0.0;
  const double p = second ? spec_.p + spec_.epsilon : spec_.p;
  StepResult r;
  r.observation = Vec::Ones(1);
  r.true_reward = uniform01(rng_) < p ? 1.0 : 0.0;
  r.reward = r.true_reward;
  r.goal = second;
  r.done = true;
  done_ = true;
  return r;
}

// ---------------------------------------------------------------------------
// Sparse chain

SparseChainEnv::SparseChainEnv(SparseChainSpec spec) : spec_(spec) {
  require(spec.horizon > 0, "chain: horizon must be positive");
  require(spec.goal_distance > 0.0, "chain: goal distance must be positive");
  require(spec.step_scale > 0.0, "chain: step scale must be positive");
  require(spec.momentum >= 0.0 && spec.momentum < 1.0, "chain: momentum must lie in [0, 1)");
}

Vec SparseChainEnv::observe() const {
  Vec o(3);
  o << x_, v_ / spec_.step_scale, static_cast<double>(t_) / spec_.horizon;
  return o;
}

Vec SparseChainEnv::reset(Rng& /*rng*/) {
  x_ = 0.0;
  v_ = 0.0;
  t_ = 0;
  done_ = false;
  return observe();
}

StepResult SparseChainEnv::step(const Vec& action) {
  require(!done_, "chain: step called after episode end");
  require(action.size() == 1, "chain: action must be 1-dimensional");
  const double a = clamp(action[0], -1.0, 1.0);
  v_ = spec_.momentum * v_ + (1.0 - spec_.momentum) * spec_.step_scale * a;
  x_ += v_;
  ++t_;
  done_ = t_ >= spec_.horizon;
  StepResult r;
  r.goal = x_ >= spec_.goal_distance;
  r.true_reward = (r.goal ? spec_.goal_reward : 0.0) - spec_.energy_cost * a * a;
  r.reward = r.true_reward;
  r.done = done_;
  r.observation = observe();
  return r;
}

// ---------------------------------------------------------------------------
// Wrappers

Vec EpisodicReward::reset(Rng& rng) {
  accumulated_ = 0.0;
  return inner_->reset(rng);
}

StepResult EpisodicReward::step(const Vec& action) {
  StepResult r = inner_->step(action);
  accumulated_ += r.reward;
  if (r.done) {
    r.reward = accumulated_;
    accumulated_ = 0.0;
  } else {
    r.reward = 0.0;
  }
  return r;
}

std::unique_ptr<Env> EpisodicReward::clone() const {
  auto out = std::make_unique<EpisodicReward>(inner_->clone());
  out->accumulated_ = accumulated_;
  return out;
}

NoisyReward::NoisyReward(std::unique_ptr<Env> inner, double p_m, Rng& rng)
    : inner_(std::move(inner)), p_m_(p_m), rng_(rng()) {
  require(p_m >= 0.0 && p_m <= 1.0, "noisy reward: p_m must lie in [0, 1]");
}

NoisyReward::NoisyReward(const NoisyReward& other)
    : inner_(other.inner_->clone()), p_m_(other.p_m_), rng_(other.rng_) {}

Vec NoisyReward::reset(Rng& rng) { return inner_->reset(rng); }

StepResult NoisyReward::step(const Vec& action) {
  StepResult r = inner_->step(action);
  const bool keep = uniform01(rng_) >= p_m_;
  if (!keep) r.reward = 0.0;
  return r;
}

std::unique_ptr<Env> NoisyReward::clone() const {
  return std::unique_ptr<Env>(new NoisyReward(*this));
}

std::unique_ptr<Env> wrap_episodic(std::unique_ptr<Env> env) {
  return std::make_unique<EpisodicReward>(std::move(env));
}

std::unique_ptr<Env> wrap_noisy(std::unique_ptr<Env> env, double p_m, Rng& rng) {
  return std::make_unique<NoisyReward>(std::move(env), p_m, rng);
}

std::unique_ptr<Env> make_env(const EnvConfig& cfg, std::uint64_t mask_seed) {
  std::unique_ptr<Env> env;
  switch (cfg.kind) {
    case EnvKind::kMaze: env = std::make_unique<MazeEnv>(cfg.maze); break;
    case EnvKind::kBandit: env = std::make_unique<BanditEnv>(cfg.bandit); break;
    case EnvKind::kChain: env = std::make_unique<SparseChainEnv>(cfg.chain); break;
  }
  switch (cfg.reward_mode) {
    case RewardMode::kDense: return env;
    case RewardMode::kEpisodic: return wrap_episodic(std::move(env));
    case RewardMode::kNoisy: {
      Rng mask_rng(mask_seed);
      return wrap_noisy(std::move(env), cfg.p_m, mask_rng);
    }
  }
  return env;
}

Mat visitation_histogram(const std::vector<Trajectory>& trajectories, int resolution, double lo,
                         double hi) {
  require(resolution > 0, "visitation_histogram: resolution must be positive");
  require(hi > lo, "visitation_histogram: empty bounds");
  Mat grid = Mat::Zero(resolution, resolution);
  double total = 0.0;
  auto cell = [&](double v) {
    const int c = static_cast<int>(std::floor((v - lo) / (hi - lo) * resolution));
    return c < 0 ? 0 : (c >= resolution ? resolution - 1 : c);
  };
  for (const auto& t : trajectories) {
    for (Eigen::Index k = 0; k < t.states.rows(); ++k) {
      const double x = t.states.cols() > 0 ? t.states(k, 0) : 0.0;
      const double y = t.states.cols() > 1 ? t.states(k, 1) : 0.0;
      grid(cell(y), cell(x)) += 1.0;
      total += 1.0;
    }
  }
  require(total > 0.0, "visitation_histogram: no states to histogram");
  return grid / total;
}

}  // namespace divmin
