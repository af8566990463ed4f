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

#include "divmin/gaussian.hpp"

namespace divmin {

GaussianPolicy::GaussianPolicy(Mlp mean_net, Vec log_std) : mean_net_(std::move(mean_net)) {
  require(log_std.size() == mean_net_.shape().out, "policy: log_std size must equal action dim");
  set_log_std(log_std);
}

GaussianPolicy GaussianPolicy::init(int obs_dim, int act_dim, int hidden, Rng& rng,
                                    double init_log_std) {
  Mlp net = Mlp::xavier({obs_dim, hidden, hidden, act_dim}, rng, 0.01);
  return GaussianPolicy(std::move(net), Vec::Constant(act_dim, init_log_std));
}

void GaussianPolicy::set_log_std(const Vec& log_std) {
  require(log_std.allFinite(), "policy: log_std must be finite");
  log_std_ = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

std::size_t GaussianPolicy::param_count() const {
  return static_cast<std::size_t>(mean_net_.params().size() + log_std_.size());
}

Vec GaussianPolicy::flat() const {
  Vec out(static_cast<Eigen::Index>(param_count()));
  out << mean_net_.params(), log_std_;
  return out;
}

void GaussianPolicy::set_flat(const Vec& flat) {
  require(flat.size() == static_cast<Eigen::Index>(param_count()),
          "policy: flat parameter size mismatch");
  const Eigen::Index n = mean_net_.params().size();
  mean_net_.params() = flat.head(n);
  set_log_std(flat.tail(log_std_.size()));
}

double gaussian_log_prob(const GaussianPolicy& policy, const Vec& state, const Vec& action) {
  require(action.size() == policy.act_dim(), "gaussian_log_prob: action dimension mismatch");
  const Vec mu = policy.mean(state);
  double lp = 0.0;
  for (Eigen::Index d = 0; d < mu.size(); ++d) {
    const double ls = policy.log_std()[d];
    const double z = (action[d] - mu[d]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi;
  }
  return lp;
}

Vec gaussian_sample(const GaussianPolicy& policy, const Vec& state, Rng& rng) {
  Vec a = policy.mean(state);
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    a[d] += std::exp(policy.log_std()[d]) * standard_normal(rng);
  }
  return a;
}

Vec gaussian_log_prob_batch(const GaussianPolicy& policy, const Mat& states, const Mat& actions,
                            LogProbCache* cache) {
  require(actions.cols() == policy.act_dim() && actions.rows() == states.rows(),
          "gaussian_log_prob_batch: shape mismatch");
  MlpCache local;
  Mat mean = policy.mean_net().forward(states, cache ? &cache->mlp : &local);
  const Vec inv_std = (-policy.log_std()).array().exp();
  const double const_term = policy.log_std().sum() + kHalfLog2Pi * policy.act_dim();
  Vec lp(states.rows());
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < mean.cols(); ++d) {
      const double z = (actions(k, d) - mean(k, d)) * inv_std[d];
      acc += z * z;
    }
    lp[k] = -0.5 * acc - const_term;
  }
  if (cache != nullptr) cache->mean = std::move(mean);
  return lp;
}

Vec gaussian_log_prob_grad(const GaussianPolicy& policy, const LogProbCache& cache,
                           const Mat& actions, const Vec& weights) {
  require(weights.size() == actions.rows() && cache.mean.rows() == actions.rows(),
          "gaussian_log_prob_grad: shape mismatch");
  const Vec inv_var = (-2.0 * policy.log_std()).array().exp();
  const Eigen::Index adim = policy.act_dim();
  Mat dmean(actions.rows(), adim);
  Vec dlog_std = Vec::Zero(adim);
  for (Eigen::Index k = 0; k < actions.rows(); ++k) {
    for (Eigen::Index d = 0; d < adim; ++d) {
      const double diff = actions(k, d) - cache.mean(k, d);
      dmean(k, d) = weights[k] * diff * inv_var[d];
      dlog_std[d] += weights[k] * (diff * diff * inv_var[d] - 1.0);
    }
  }
  const Vec gnet = policy.mean_net().backward(cache.mlp, dmean);
  Vec out(gnet.size() + adim);
  out << gnet, dlog_std;
  return out;
}

}  // namespace divmin
