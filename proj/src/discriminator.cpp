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

#include "divmin/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace divmin {

double logistic_loss(const Mlp& net, const Mat& positive, const Mat& negative, Vec* grad) {
  require(positive.rows() > 0 && negative.rows() > 0, "logistic_loss: both classes must be non-empty");
  const double wp = 1.0 / static_cast<double>(positive.rows());
  const double wn = 1.0 / static_cast<double>(negative.rows());
  double loss = 0.0;
  MlpCache cp, cn;
  const Mat zp = net.forward(positive, grad ? &cp : nullptr);
  const Mat zn = net.forward(negative, grad ? &cn : nullptr);
  for (Eigen::Index k = 0; k < zp.rows(); ++k) loss += wp * softplus(-zp(k, 0));
  for (Eigen::Index k = 0; k < zn.rows(); ++k) loss += wn * softplus(zn(k, 0));
  if (grad != nullptr) {
    Mat gp(zp.rows(), 1), gn(zn.rows(), 1);
    for (Eigen::Index k = 0; k < zp.rows(); ++k) gp(k, 0) = wp * (sigmoid(zp(k, 0)) - 1.0);
    for (Eigen::Index k = 0; k < zn.rows(); ++k) gn(k, 0) = wn * sigmoid(zn(k, 0));
    *grad = net.backward(cp, gp) + net.backward(cn, gn);
  }
  return loss;
}

std::vector<double> train_logistic(Mlp& net, AdamState& opt, const Mat& positive,
                                   const Mat& negative, int epochs, int minibatch, Rng& rng) {
  std::vector<double> trace;
  if (epochs <= 0 || positive.rows() == 0 || negative.rows() == 0) return trace;
  require(minibatch > 0, "train_logistic: minibatch must be positive");
  const auto np = static_cast<std::size_t>(positive.rows());
  const auto nn = static_cast<std::size_t>(negative.rows());
  const std::size_t steps = (std::max(np, nn) + static_cast<std::size_t>(minibatch) - 1) /
                            static_cast<std::size_t>(minibatch);
  const auto mb_p = std::min<std::size_t>(np, static_cast<std::size_t>(minibatch));
  const auto mb_n = std::min<std::size_t>(nn, static_cast<std::size_t>(minibatch));
  std::vector<std::size_t> perm_p(np), perm_n(nn);
  Mat bp(static_cast<Eigen::Index>(mb_p), positive.cols());
  Mat bn(static_cast<Eigen::Index>(mb_n), negative.cols());
  Vec grad;
  for (int e = 0; e < epochs; ++e) {
    std::iota(perm_p.begin(), perm_p.end(), 0);
    std::iota(perm_n.begin(), perm_n.end(), 0);
    std::shuffle(perm_p.begin(), perm_p.end(), rng);
    std::shuffle(perm_n.begin(), perm_n.end(), rng);
    double total = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      for (std::size_t k = 0; k < mb_p; ++k) {
        bp.row(static_cast<Eigen::Index>(k)) =
            positive.row(static_cast<Eigen::Index>(perm_p[(s * mb_p + k) % np]));
      }
      for (std::size_t k = 0; k < mb_n; ++k) {
        bn.row(static_cast<Eigen::Index>(k)) =
            negative.row(static_cast<Eigen::Index>(perm_n[(s * mb_n + k) % nn]));
      }
      total += logistic_loss(net, bp, bn, &grad);
      adam_step(opt, net.params(), grad);
    }
    trace.push_back(total / static_cast<double>(steps));
  }
  return trace;
}

Discriminator::Discriminator(int state_dim, int action_dim, DiscriminatorConfig cfg, Rng& init_rng)
    : cfg_(cfg),
      net_(Mlp::xavier({state_dim + action_dim, cfg.hidden, cfg.hidden, 1}, init_rng, 0.1)),
      opt_(net_.params().size(), cfg.lr) {}

Vec Discriminator::probabilities(const Mat& features) const {
  const Mat z = net_.forward(features);
  Vec p(z.rows());
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    p[k] = clamp(sigmoid(z(k, 0)), kProbClip, 1.0 - kProbClip);
  }
  return p;
}

double Discriminator::probability(const Vec& state, const Vec& action) const {
  Vec x(state.size() + action.size());
  x << state, action;
  return clamp(sigmoid(net_.forward(x)[0]), kProbClip, 1.0 - kProbClip);
}

std::vector<double> train_discriminator(Discriminator& disc, const PairBatch& policy_pairs,
                                        const PairBatch& replay_pairs, int epochs, Rng& rng) {
  if (replay_pairs.size() == 0 || policy_pairs.size() == 0 || epochs <= 0) return {};
  auto trace = train_logistic(disc.net(), disc.optimizer(), policy_pairs.features(),
                              replay_pairs.features(), epochs, disc.config().minibatch, rng);
  disc.mark_updated();
  return trace;
}

double shaped_reward(const Discriminator& disc, const Vec& state, const Vec& action) {
  return -std::log(disc.probability(state, action));
}

Vec shaped_rewards(const Discriminator& disc, const Mat& features) {
  return -disc.probabilities(features).array().log().matrix();
}

double js_estimate(const Discriminator& disc, const PairBatch& policy_pairs,
                   const PairBatch& replay_pairs) {
  require(policy_pairs.size() > 0 && replay_pairs.size() > 0, "js_estimate: empty batch");
  const Vec pp = disc.probabilities(policy_pairs.features());
  const Vec pr = disc.probabilities(replay_pairs.features());
  const double value =
      0.5 * (kLog4 + pp.array().log().mean() + (1.0 - pr.array()).log().mean());
  return clamp(value, 0.0, kLog2);
}

}  // namespace divmin
