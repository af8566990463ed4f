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

#include <cstddef>

#include "divmin/linalg.hpp"

namespace divmin {

/// input -> hidden1 (tanh) -> hidden2 (tanh) -> output (linear).
struct MlpShape {
  int in = 0;
  int hidden1 = 64;
  int hidden2 = 64;
  int out = 0;

  std::size_t param_count() const {
    return static_cast<std::size_t>(hidden1) * (in + 1) +
           static_cast<std::size_t>(hidden2) * (hidden1 + 1) +
           static_cast<std::size_t>(out) * (hidden2 + 1);
  }
  bool operator==(const MlpShape&) const = default;
};

/// Activations kept from a batched forward pass for the backward pass.
struct MlpCache {
  Mat input;
  Mat h1;
  Mat h2;
};

/// Fixed two-hidden-layer perceptron whose parameters live in one flat vector
/// laid out as W1, b1, W2, b2, W3, b3 (weights row-major, out x in).
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpShape shape);

  /// Xavier-uniform weights, zero biases; the output layer is scaled by
  /// out_scale.
  static Mlp xavier(MlpShape shape, Rng& rng, double out_scale = 1.0);

  const MlpShape& shape() const { return shape_; }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  /// Single-sample forward pass.
  Vec forward(const Vec& input) const;

  /// Batched forward pass; one sample per row. Fills cache when given.
  Mat forward(const Mat& input, MlpCache* cache = nullptr) const;

  /// Gradient of sum_rows(out_grad . output) with respect to the flat
  /// parameters. Optionally also returns the gradient with respect to the
  /// input rows.
  Vec backward(const MlpCache& cache, const Mat& out_grad,
               Mat* input_grad = nullptr) const;

 private:
  using MatMap = Eigen::Map<const Mat>;
  using VecMap = Eigen::Map<const Vec>;
  MatMap w1() const;
  VecMap b1() const;
  MatMap w2() const;
  VecMap b2() const;
  MatMap w3() const;
  VecMap b3() const;

  MlpShape shape_;
  Vec params_;
};

}  // namespace divmin
