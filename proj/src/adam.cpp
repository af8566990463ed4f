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

#include "divmin/adam.hpp"

#include <algorithm>
#include <cmath>

namespace divmin {

AdamOutcome adam_step(AdamState& opt, Vec& params, const Vec& grads) {
  require(grads.size() == params.size() && opt.m.size() == params.size() &&
              opt.v.size() == params.size(),
          "adam_step: shape mismatch");
  if (!grads.allFinite()) return AdamOutcome::kRejectedNonFinite;
  ++opt.step;
  opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grads;
  opt.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double m_hat = opt.m[k] / bc1;
    const double v_hat = opt.v[k] / bc2;
    params[k] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
  }
  return AdamOutcome::kApplied;
}

double finite_diff_check(const LossFn& loss, const Vec& params, double eps) {
  require(eps >= 1e-7 && eps <= 1e-3, "finite_diff_check: eps must lie in [1e-7, 1e-3]");
  Vec analytic;
  loss(params, &analytic);
  require(analytic.size() == params.size(), "finite_diff_check: gradient size mismatch");
  Vec probe = params;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    probe[k] = params[k] + eps;
    const double up = loss(probe, nullptr);
    probe[k] = params[k] - eps;
    const double down = loss(probe, nullptr);
    probe[k] = params[k];
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic[k]) / denom);
  }
  return worst;
}

}  // namespace divmin
