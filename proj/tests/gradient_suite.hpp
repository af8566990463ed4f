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

// Finite-difference checks of every differentiable loss, one seed at a time.
// Shared by the unit tests and the acceptance binary.

#include <cstdint>

#include "divmin/discriminator.hpp"
#include "divmin/ppo.hpp"
#include "divmin/svpg.hpp"
#include "oracles.hpp"

namespace gradsuite {

using namespace divmin;

inline Mat random_mat(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * standard_normal(rng);
  return m;
}

inline Vec random_vec(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * standard_normal(rng);
  return v;
}

/// Two-stream clipped surrogate as a function of the flat policy parameters.
inline double surrogate_error(std::uint64_t seed) {
  Rng rng(seed);
  const int sdim = 1 + static_cast<int>(seed % 3), adim = 1 + static_cast<int>(seed % 2);
  const int n = 24;
  GaussianPolicy policy = GaussianPolicy::init(sdim, adim, 6, rng, -0.3);
  Vec flat = policy.flat();
  flat.head(flat.size() - adim) = random_vec(flat.size() - adim, rng, 0.4);
  policy.set_flat(flat);
  const Mat states = random_mat(n, sdim, rng);
  const Mat actions = random_mat(n, adim, rng);
  // Behaviour log-probs perturbed so both clip branches occur.
  Vec old_lp = gaussian_log_prob_batch(policy, states, actions) + random_vec(n, rng, 0.25);
  const Vec a1 = random_vec(n, rng), a2 = random_vec(n, rng);
  const double nu = 0.3 + 0.4 * uniform01(rng);
  const double clip = 0.2;

  auto loss = [&](const Vec& p) {
    GaussianPolicy q = policy;
    q.set_flat(p);
    const Vec ratio = (gaussian_log_prob_batch(q, states, actions) - old_lp).array().exp();
    return (1 - nu) * clipped_surrogate(ratio, a1, clip) + nu * clipped_surrogate(ratio, a2, clip);
  };
  const Vec g = interpolated_policy_gradient(policy, states, actions, old_lp, a1, a2, nu, clip);
  return oracle::gradient_error(loss, flat, g, 1e-5);
}

inline double value_error(std::uint64_t seed) {
  Rng rng(seed);
  const int sdim = 1 + static_cast<int>(seed % 4);
  Mlp v = Mlp::xavier({sdim, 7, 5, 1}, rng);
  v.params() = random_vec(v.params().size(), rng, 0.5);
  const Mat states = random_mat(30, sdim, rng);
  const Vec targets = random_vec(30, rng, 2.0);
  Vec g;
  value_loss(v, states, targets, &g);
  auto loss = [&](const Vec& p) {
    Mlp w = v;
    w.params() = p;
    return value_loss(w, states, targets, nullptr);
  };
  return oracle::gradient_error(loss, v.params(), g);
}

inline double discriminator_error(std::uint64_t seed) {
  Rng rng(seed);
  const int sdim = 1 + static_cast<int>(seed % 3), adim = 1 + static_cast<int>(seed % 2);
  DiscriminatorConfig cfg;
  cfg.hidden = 6;
  Discriminator d(sdim, adim, cfg, rng);
  d.net().params() = random_vec(d.net().params().size(), rng, 0.5);
  const Mat pos = random_mat(20, sdim + adim, rng);
  const Mat neg = random_mat(28, sdim + adim, rng, 1.5);
  Vec g;
  logistic_loss(d.net(), pos, neg, &g);
  auto loss = [&](const Vec& p) {
    Mlp w = d.net();
    w.params() = p;
    return logistic_loss(w, pos, neg, nullptr);
  };
  return oracle::gradient_error(loss, d.net().params(), g);
}

/// Density model against draws from its reference box.
inline double density_error(std::uint64_t seed) {
  Rng rng(seed);
  const int fdim = 2 + static_cast<int>(seed % 3);
  DensityConfig cfg;
  cfg.hidden = 6;
  DensityModel m(fdim, cfg, rng);
  m.net().params() = random_vec(m.net().params().size(), rng, 0.5);
  const Mat agent = random_mat(25, fdim, rng, 0.3);
  ReferenceBox box;
  box.include(agent);
  const Mat ref = box.sample(25, rng);
  Vec g;
  logistic_loss(m.net(), agent, ref, &g);
  auto loss = [&](const Vec& p) {
    Mlp w = m.net();
    w.params() = p;
    return logistic_loss(w, agent, ref, nullptr);
  };
  return oracle::gradient_error(loss, m.net().params(), g);
}

}  // namespace gradsuite
