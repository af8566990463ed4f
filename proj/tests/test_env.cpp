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

#include <gtest/gtest.h>

#include <cmath>

#include "divmin/env.hpp"

namespace divmin {
namespace {

Vec act(double a) { return Vec::Constant(1, a); }
Vec act2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

TEST(Chain, ResetStartsAtOrigin) {
  SparseChainEnv env;
  Rng rng(1);
  const Vec o = env.reset(rng);
  ASSERT_EQ(o.size(), 3);
  EXPECT_EQ(o[0], 0.0);
  EXPECT_EQ(o[1], 0.0);
  EXPECT_EQ(o[2], 0.0);
  EXPECT_EQ(env.position(), 0.0);
}

TEST(Chain, RewardOnlyPastThreshold) {
  SparseChainSpec spec;
  spec.energy_cost = 0.0;
  spec.step_scale = 0.125;  // exact in binary
  SparseChainEnv env(spec);
  Rng rng(1);
  env.reset(rng);
  for (int t = 0; t < 7; ++t) {
    const StepResult r = env.step(act(1.0));
    EXPECT_EQ(r.reward, 0.0) << t;
    EXPECT_FALSE(r.goal);
  }
  const StepResult r = env.step(act(1.0));  // x = 1.0 >= D
  EXPECT_TRUE(r.goal);
  EXPECT_EQ(r.reward, spec.goal_reward);
}

TEST(Chain, EnergyCostIsQuadraticInClampedAction) {
  SparseChainSpec spec;
  SparseChainEnv env(spec);
  Rng rng(1);
  env.reset(rng);
  EXPECT_DOUBLE_EQ(env.step(act(0.5)).reward, -spec.energy_cost * 0.25);
  EXPECT_DOUBLE_EQ(env.step(act(-3.0)).reward, -spec.energy_cost * 1.0);
}

TEST(Chain, HorizonEndsEpisodeAndStepAfterDoneThrows) {
  SparseChainSpec spec;
  spec.horizon = 5;
  SparseChainEnv env(spec);
  Rng rng(1);
  env.reset(rng);
  for (int t = 0; t < 4; ++t) EXPECT_FALSE(env.step(act(0.0)).done);
  EXPECT_TRUE(env.step(act(0.0)).done);
  EXPECT_THROW(env.step(act(0.0)), ContractViolation);
}

TEST(Chain, MomentumCarriesVelocity) {
  SparseChainSpec spec;
  spec.momentum = 0.5;
  spec.step_scale = 0.1;
  SparseChainEnv env(spec);
  Rng rng(1);
  env.reset(rng);
  env.step(act(1.0));  // v = 0.05
  EXPECT_NEAR(env.position(), 0.05, 1e-15);
  env.step(act(0.0));  // v = 0.025
  EXPECT_NEAR(env.position(), 0.075, 1e-15);
}

TEST(Chain, RejectsBadSpec) {
  SparseChainSpec spec;
  spec.momentum = 1.0;
  EXPECT_THROW(SparseChainEnv{spec}, ContractViolation);
  spec = {};
  spec.horizon = 0;
  EXPECT_THROW(SparseChainEnv{spec}, ContractViolation);
}

TEST(Maze, ResetNearStartAndInBounds) {
  MazeEnv env;
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const Vec o = env.reset(rng);
    EXPECT_NEAR(o[0], 0.25, 0.06);
    EXPECT_NEAR(o[1], 0.25, 0.06);
  }
}

TEST(Maze, WallBlocksDirectCrossing) {
  MazeSpec spec;
  spec.motion_sigma = 0.0;
  MazeEnv env(spec);
  Rng rng(2);
  env.reset(rng);
  env.set_position(0.48, 0.3);
  env.step(act2(1.0, 0.0));
  EXPECT_LT(env.x(), spec.wall_x);
  // Above the wall the move goes through.
  env.set_position(0.48, 0.9);
  env.step(act2(1.0, 0.0));
  EXPECT_GT(env.x(), spec.wall_x);
}

TEST(Maze, CrossesWallGeometry) {
  MazeEnv env;
  EXPECT_TRUE(env.crosses_wall(0.4, 0.2, 0.6, 0.2));
  EXPECT_FALSE(env.crosses_wall(0.4, 0.8, 0.6, 0.8));
  EXPECT_FALSE(env.crosses_wall(0.1, 0.2, 0.4, 0.2));
  EXPECT_TRUE(env.crosses_wall(0.6, 0.5, 0.4, 0.5));
}

TEST(Maze, RegionRewards) {
  MazeSpec spec;
  spec.motion_sigma = 0.0;
  MazeEnv env(spec);
  Rng rng(2);
  env.reset(rng);
  env.set_position(spec.green_x, spec.green_y);
  StepResult r = env.step(act2(0.0, 0.0));
  EXPECT_TRUE(r.goal);
  EXPECT_EQ(r.reward, spec.green_reward);
  env.set_position(spec.red_x, spec.red_y);
  r = env.step(act2(0.0, 0.0));
  EXPECT_FALSE(r.goal);
  EXPECT_EQ(r.reward, spec.red_reward);
  env.set_position(0.9, 0.9);
  EXPECT_EQ(env.step(act2(0.0, 0.0)).reward, 0.0);
}

TEST(Maze, StaysInUnitSquare) {
  MazeEnv env;
  Rng rng(9);
  env.reset(rng);
  for (int t = 0; t < 250; ++t) {
    env.step(act2(t % 2 ? 5.0 : -5.0, -5.0));
    EXPECT_GE(env.x(), 0.0);
    EXPECT_LE(env.x(), 1.0);
    EXPECT_GE(env.y(), 0.0);
    EXPECT_LE(env.y(), 1.0);
  }
}

TEST(Maze, SameSeedSameEpisode) {
  MazeEnv a, b;
  Rng ra(4), rb(4);
  a.reset(ra);
  b.reset(rb);
  for (int t = 0; t < 20; ++t) {
    const StepResult x = a.step(act2(0.3, 0.7));
    const StepResult y = b.step(act2(0.3, 0.7));
    EXPECT_EQ(x.observation, y.observation);
  }
}

TEST(Bandit, ArmRatesMatchSpec) {
  BanditEnv env;
  Rng rng(3);
  double wins[2] = {0, 0};
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    env.reset(rng);
    wins[0] += env.step(act(-1.0)).reward;
    env.reset(rng);
    const StepResult r = env.step(act(1.0));
    wins[1] += r.reward;
    EXPECT_TRUE(r.done);
    EXPECT_TRUE(r.goal);
  }
  EXPECT_NEAR(wins[0] / n, 0.45, 0.015);
  EXPECT_NEAR(wins[1] / n, 0.55, 0.015);
}

TEST(Wrappers, EpisodicReleasesSumAtEnd) {
  SparseChainSpec spec;
  spec.horizon = 20;
  spec.step_scale = 0.1;
  auto dense = std::make_unique<SparseChainEnv>(spec);
  auto episodic = wrap_episodic(std::make_unique<SparseChainEnv>(spec));
  Rng r1(1), r2(1);
  dense->reset(r1);
  episodic->reset(r2);
  double sum = 0.0;
  for (int t = 0; t < 20; ++t) {
    const StepResult d = dense->step(act(0.8));
    const StepResult e = episodic->step(act(0.8));
    sum += d.reward;
    EXPECT_EQ(d.true_reward, e.true_reward);
    EXPECT_EQ(d.observation, e.observation);
    if (t < 19) EXPECT_EQ(e.reward, 0.0);
    else EXPECT_DOUBLE_EQ(e.reward, sum);
  }
  EXPECT_NE(sum, 0.0);
}

TEST(Wrappers, NoisyEndpoints) {
  SparseChainSpec spec;
  spec.step_scale = 0.5;
  Rng m0(1), m1(1);
  auto keep = wrap_noisy(std::make_unique<SparseChainEnv>(spec), 0.0, m0);
  auto drop = wrap_noisy(std::make_unique<SparseChainEnv>(spec), 1.0, m1);
  Rng r1(1), r2(1);
  keep->reset(r1);
  drop->reset(r2);
  for (int t = 0; t < 10; ++t) {
    const StepResult k = keep->step(act(1.0));
    const StepResult d = drop->step(act(1.0));
    EXPECT_EQ(k.reward, k.true_reward);
    EXPECT_EQ(d.reward, 0.0);
    EXPECT_EQ(k.done, d.done);
    EXPECT_EQ(k.observation, d.observation);
  }
}

TEST(Wrappers, NoisyMaskRateMatchesProbability) {
  MazeSpec spec;
  spec.horizon = 100000;
  spec.motion_sigma = 0.0;
  spec.red_radius = 2.0;  // every step earns the red reward
  Rng mask(7);
  auto env = wrap_noisy(std::make_unique<MazeEnv>(spec), 0.3, mask);
  Rng rng(1);
  env->reset(rng);
  int kept = 0;
  for (int t = 0; t < 100000; ++t) kept += env->step(act2(0, 0)).reward != 0.0;
  EXPECT_NEAR(kept / 1e5, 0.7, 0.01);
}

TEST(Wrappers, MakeEnvDeterministicPerMaskSeed) {
  EnvConfig cfg;
  cfg.reward_mode = RewardMode::kNoisy;
  cfg.p_m = 0.5;
  cfg.chain.step_scale = 0.2;
  auto a = make_env(cfg, 11), b = make_env(cfg, 11), c = make_env(cfg, 12);
  Rng r(0);
  a->reset(r);
  b->reset(r);
  c->reset(r);
  int diff = 0;
  for (int t = 0; t < 100; ++t) {
    const double ra = a->step(act(1.0)).reward, rb = b->step(act(1.0)).reward;
    EXPECT_EQ(ra, rb);
    diff += ra != c->step(act(1.0)).reward;
  }
  EXPECT_GT(diff, 0);
}

TEST(Heatmap, RowsAreYColumnsAreX) {
  Trajectory t;
  t.states = Mat(2, 2);
  t.states << 0.05, 0.95,   // x low, y high
      0.95, 0.05;
  t.actions = Mat::Zero(2, 2);
  t.rewards = {0, 0};
  t.dones = {0, 1};
  const Mat h = visitation_histogram({t}, 10);
  EXPECT_DOUBLE_EQ(h(9, 0), 0.5);
  EXPECT_DOUBLE_EQ(h(0, 9), 0.5);
  EXPECT_DOUBLE_EQ(h.sum(), 1.0);
}

}  // namespace
}  // namespace divmin
