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

#include <cstdint>
#include <vector>

#include "divmin/linalg.hpp"

namespace divmin {

/// One episode: ordered (state, action, reward, done) transitions. Rewards are
/// the ones the agent observed; total_return is their undiscounted sum.
struct Trajectory {
  Mat states;
  Mat actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  double total_return = 0.0;

  int length() const { return static_cast<int>(rewards.size()); }
};

class TrajectoryBuilder {
 public:
  TrajectoryBuilder(int obs_dim, int act_dim) : obs_dim_(obs_dim), act_dim_(act_dim) {}

  void append(const Vec& state, const Vec& action, double reward, bool done) {
    states_.insert(states_.end(), state.data(), state.data() + state.size());
    actions_.insert(actions_.end(), action.data(), action.data() + action.size());
    rewards_.push_back(reward);
    dones_.push_back(done ? 1 : 0);
  }

  Trajectory finish() {
    require(!rewards_.empty(), "trajectory: length must be at least 1");
    Trajectory t;
    const auto n = static_cast<Eigen::Index>(rewards_.size());
    t.states = Eigen::Map<Mat>(states_.data(), n, obs_dim_);
    t.actions = Eigen::Map<Mat>(actions_.data(), n, act_dim_);
    t.rewards = std::move(rewards_);
    t.dones = std::move(dones_);
    double sum = 0.0;
    for (double r : t.rewards) sum += r;
    t.total_return = sum;
    states_.clear();
    actions_.clear();
    rewards_.clear();
    dones_.clear();
    return t;
  }

 private:
  int obs_dim_;
  int act_dim_;
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> dones_;
};

}  // namespace divmin
