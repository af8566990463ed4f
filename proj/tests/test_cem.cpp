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

#include "divmin/cem.hpp"

namespace divmin {
namespace {

TEST(Cem, QuadraticConvergesWithinFiftyGenerations) {
  // Plain CEM shrinks its variance geometrically; a population of 100 keeps
  // the collapse slower than the approach to the optimum.
  Vec target(4);
  target << 1.0, -2.0, 0.5, 3.0;
  auto f = [&](const Vec& x) { return -(x - target).squaredNorm(); };
  CemConfig cfg;
  cfg.population = 100;
  cfg.elite_frac = 0.25;
  cfg.iterations = 50;
  cfg.init_std = 2.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const CemResult r = cem_optimize(f, Vec::Zero(4), cfg, rng);
    EXPECT_LT((r.mean - target).cwiseAbs().maxCoeff(), 1e-2) << seed;
    EXPECT_EQ(r.trace.size(), 50u);
    EXPECT_LE(r.best_score, 0.0);
  }
}

TEST(Cem, FullEliteFractionGivesPopulationMean) {
  std::vector<Vec> seen;
  auto f = [&](const Vec& x) {
    seen.push_back(x);
    return x.sum();
  };
  CemConfig cfg;
  cfg.population = 10;
  cfg.elite_frac = 1.0;
  cfg.iterations = 1;
  Rng rng(2);
  const CemResult r = cem_optimize(f, Vec::Zero(3), cfg, rng);
  Vec mean = Vec::Zero(3);
  for (const auto& x : seen) mean += x;
  mean /= 10.0;
  EXPECT_LT((r.mean - mean).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Cem, FixedSeedIdenticalTrace) {
  auto f = [](const Vec& x) { return -x.squaredNorm(); };
  CemConfig cfg;
  cfg.iterations = 10;
  Rng a(3), b(3);
  const CemResult ra = cem_optimize(f, Vec::Ones(5), cfg, a);
  const CemResult rb = cem_optimize(f, Vec::Ones(5), cfg, b);
  for (std::size_t g = 0; g < ra.trace.size(); ++g) {
    EXPECT_EQ(ra.trace[g].best, rb.trace[g].best);
    EXPECT_EQ(ra.trace[g].elite_mean, rb.trace[g].elite_mean);
  }
  EXPECT_EQ(ra.mean, rb.mean);
}

TEST(Cem, CollapsedVarianceReinflated) {
  auto f = [](const Vec& x) { return x[0]; };
  CemConfig cfg;
  cfg.iterations = 1;
  cfg.init_std = 1e-8;
  Rng rng(4);
  const CemResult r = cem_optimize(f, Vec::Zero(2), cfg, rng);
  EXPECT_EQ(r.trace[0].reinflated, 2);
  EXPECT_EQ(r.reinflation_events, 2);
  EXPECT_EQ(r.variance, Vec::Constant(2, 1e-6));
}

TEST(Cem, RejectsBadConfig) {
  auto f = [](const Vec& x) { return x[0]; };
  Rng rng(5);
  CemConfig cfg;
  cfg.population = 3;
  EXPECT_THROW(cem_optimize(f, Vec::Zero(1), cfg, rng), ContractViolation);
  cfg = {};
  cfg.elite_frac = 0.0;
  EXPECT_THROW(cem_optimize(f, Vec::Zero(1), cfg, rng), ContractViolation);
}

TEST(Cem, PolicySearchOnBanditPrefersBetterArm) {
  // Deterministic mean actions: positive picks the 0.55 arm.
  EnvConfig e;
  e.kind = EnvKind::kBandit;
  const auto env = make_env(e, 0);
  CemConfig cfg;
  cfg.population = 16;
  cfg.iterations = 15;
  const CemPolicyResult r = cem_baseline(*env, cfg, 8, 400, 7);
  EXPECT_GT(r.policy.mean(Vec::Ones(1))[0], 0.0);
  EXPECT_EQ(r.search.trace.size(), 15u);
}

}  // namespace
}  // namespace divmin
