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

#include "divmin/cem.hpp"

#include <algorithm>
#include <numeric>

#include "divmin/agent.hpp"

namespace divmin {

namespace {
constexpr double kVarianceFloor = 1e-12;
constexpr double kVarianceReset = 1e-6;
}  // namespace

CemResult cem_optimize(const std::function<double(const Vec&)>& objective, const Vec& init_mean,
                       const CemConfig& cfg, Rng& rng) {
  require(cfg.population >= 4, "cem: population must be at least 4");
  require(cfg.elite_frac > 0.0 && cfg.elite_frac <= 1.0, "cem: elite_frac must lie in (0, 1]");
  require(cfg.iterations >= 1 && cfg.init_std > 0.0, "cem: bad iterations or init_std");
  const Eigen::Index dim = init_mean.size();
  const int n_elite = std::max(1, static_cast<int>(cfg.elite_frac * cfg.population + 0.5));
  CemResult out;
  out.mean = init_mean;
  out.variance = Vec::Constant(dim, cfg.init_std * cfg.init_std);
  out.best_score = -std::numeric_limits<double>::infinity();
  out.best_params = init_mean;
  Mat samples(cfg.population, dim);
  std::vector<double> scores(static_cast<std::size_t>(cfg.population));
  std::vector<int> order(static_cast<std::size_t>(cfg.population));
  for (int g = 0; g < cfg.iterations; ++g) {
    const Vec sd = out.variance.array().sqrt().matrix();
    for (int p = 0; p < cfg.population; ++p) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        samples(p, d) = out.mean[d] + sd[d] * standard_normal(rng);
      }
      scores[static_cast<std::size_t>(p)] = objective(samples.row(p).transpose());
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    CemGeneration gen;
    gen.best = scores[static_cast<std::size_t>(order[0])];
    gen.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / cfg.population;
    if (gen.best > out.best_score) {
      out.best_score = gen.best;
      out.best_params = samples.row(order[0]).transpose();
    }
    Vec mean = Vec::Zero(dim);
    double elite_sum = 0.0;
    for (int k = 0; k < n_elite; ++k) {
      mean += samples.row(order[static_cast<std::size_t>(k)]).transpose();
      elite_sum += scores[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    }
    mean /= n_elite;
    Vec var = Vec::Zero(dim);
    for (int k = 0; k < n_elite; ++k) {
      var += (samples.row(order[static_cast<std::size_t>(k)]).transpose() - mean)
                 .array()
                 .square()
                 .matrix();
    }
    var /= n_elite;
    for (Eigen::Index d = 0; d < dim; ++d) {
      if (var[d] < kVarianceFloor) {
        var[d] = kVarianceReset;
        ++gen.reinflated;
      }
    }
    out.reinflation_events += gen.reinflated;
    gen.elite_mean = elite_sum / n_elite;
    out.mean = std::move(mean);
    out.variance = std::move(var);
    out.trace.push_back(gen);
  }
  return out;
}

CemPolicyResult cem_baseline(const Env& env, const CemConfig& cfg, int hidden, int episodes,
                             std::uint64_t seed) {
  require(episodes >= 1, "cem: episodes must be positive");
  Rng init(stream_seed(seed, SeedStream::kInit));
  GaussianPolicy base = GaussianPolicy::init(env.obs_dim(), env.act_dim(), hidden, init,
                                             GaussianPolicy::kLogStdMin);
  auto sim = env.clone();
  Rng rollout(stream_seed(seed, SeedStream::kRollout));
  Mlp candidate = base.mean_net();
  auto objective = [&](const Vec& params) {
    candidate.params() = params;
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
      Vec obs = sim->reset(rollout);
      while (true) {
        const StepResult r = sim->step(candidate.forward(obs));
        total += r.true_reward;
        obs = r.observation;
        if (r.done) break;
      }
    }
    return total / episodes;
  };
  Rng search(stream_seed(seed, SeedStream::kShuffle));
  CemPolicyResult out;
  out.search = cem_optimize(objective, base.mean_net().params(), cfg, search);
  Mlp best = base.mean_net();
  best.params() = out.search.best_params;
  out.policy = GaussianPolicy(best, base.log_std());
  return out;
}

}  // namespace divmin
