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

// Cross-entropy method over a flat parameter vector with a diagonal Gaussian
// search distribution.

#include <functional>
#include <vector>

#include "divmin/env.hpp"
#include "divmin/gaussian.hpp"

namespace divmin {

struct CemConfig {
  int population = 32;
  double elite_frac = 0.25;
  int iterations = 50;
  double init_std = 0.5;
};

struct CemGeneration {
  double best = 0.0;
  double mean = 0.0;
  double elite_mean = 0.0;
  int reinflated = 0;  // coordinates whose variance collapsed this generation
};

struct CemResult {
  Vec best_params;
  double best_score = 0.0;
  Vec mean;
  Vec variance;
  std::vector<CemGeneration> trace;
  int reinflation_events = 0;
};

/// Maximises objective. Variances that fall below 1e-12 are reset to 1e-6.
CemResult cem_optimize(const std::function<double(const Vec&)>& objective, const Vec& init_mean,
                       const CemConfig& cfg, Rng& rng);

/// CEM over the mean network of a Gaussian policy, scoring each candidate by
/// the mean true return of `episodes` rollouts of its deterministic mean action.
struct CemPolicyResult {
  GaussianPolicy policy;
  CemResult search;
};
CemPolicyResult cem_baseline(const Env& env, const CemConfig& cfg, int hidden, int episodes,
                             std::uint64_t seed);

}  // namespace divmin
