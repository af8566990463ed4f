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
#include <functional>

#include "divmin/linalg.hpp"

namespace divmin {

struct AdamState {
  std::int64_t step = 0;
  Vec m;
  Vec v;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double lr_) : m(Vec::Zero(static_cast<Eigen::Index>(n))),
                                         v(Vec::Zero(static_cast<Eigen::Index>(n))), lr(lr_) {}
};

enum class AdamOutcome { kApplied, kRejectedNonFinite };

/// One Adam descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
/// A gradient with any non-finite entry leaves params and state untouched.
AdamOutcome adam_step(AdamState& opt, Vec& params, const Vec& grads);

/// loss(params, grad_out) returns the loss and writes the analytic gradient
/// when grad_out is non-null.
using LossFn = std::function<double(const Vec& params, Vec* grad)>;

/// Worst elementwise relative error between the analytic gradient and a central
/// difference, with denominator max(|a|, |b|, 1e-8).
double finite_diff_check(const LossFn& loss, const Vec& params, double eps);

}  // namespace divmin
