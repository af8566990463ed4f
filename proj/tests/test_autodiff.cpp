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

#include "divmin/adam.hpp"
#include "divmin/gaussian.hpp"
#include "divmin/mlp.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"

namespace divmin {
namespace {

using gradsuite::random_mat;
using gradsuite::random_vec;

oracle::Vector to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

TEST(Mlp, ParamCountMatchesLayout) {
  const MlpShape s{3, 5, 4, 2};
  EXPECT_EQ(s.param_count(), 5u * 4 + 4u * 6 + 2u * 5);
  EXPECT_EQ(Mlp(s).params().size(), static_cast<Eigen::Index>(s.param_count()));
}

TEST(Mlp, ForwardMatchesNaiveLoops) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const MlpShape s{1 + int(seed % 4), 3 + int(seed % 5), 2 + int(seed % 3), 1 + int(seed % 2)};
    Mlp net = Mlp::xavier(s, rng);
    net.params() = random_vec(net.params().size(), rng, 0.7);
    const Mat x = random_mat(6, s.in, rng);
    const Mat batched = net.forward(x);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const auto want = oracle::mlp_forward(to_std(net.params()), s.in, s.hidden1, s.hidden2,
                                            s.out, to_std(x.row(r).transpose()));
      const Vec single = net.forward(Vec(x.row(r).transpose()));
      for (int o = 0; o < s.out; ++o) {
        EXPECT_NEAR(batched(r, o), want[o], 1e-12);
        EXPECT_NEAR(single[o], want[o], 1e-12);
      }
    }
  }
}

TEST(Mlp, XavierZeroBiasesAndBoundedWeights) {
  Rng rng(3);
  const MlpShape s{4, 8, 6, 2};
  Mlp net = Mlp::xavier(s, rng, 0.1);
  const Vec& p = net.params();
  const double bound1 = std::sqrt(6.0 / (4 + 8));
  for (int k = 0; k < 32; ++k) EXPECT_LE(std::abs(p[k]), bound1);
  for (int k = 32; k < 40; ++k) EXPECT_EQ(p[k], 0.0);
  EXPECT_TRUE(p.allFinite());
}

TEST(Mlp, BackwardMatchesFiniteDifference) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const MlpShape s{2, 5, 4, 3};
    Mlp net = Mlp::xavier(s, rng);
    net.params() = random_vec(net.params().size(), rng, 0.6);
    const Mat x = random_mat(7, 2, rng);
    const Mat w = random_mat(7, 3, rng);
    MlpCache cache;
    net.forward(x, &cache);
    Mat input_grad;
    const Vec g = net.backward(cache, w, &input_grad);
    auto f = [&](const Vec& p) {
      Mlp q = net;
      q.params() = p;
      return (q.forward(x).array() * w.array()).sum();
    };
    EXPECT_LT(oracle::gradient_error(f, net.params(), g), 1e-4) << "seed " << seed;
    // Input gradient of one row.
    auto fx = [&](const Vec& row) {
      Mat xx = x;
      xx.row(0) = row.transpose();
      return (net.forward(xx).array() * w.array()).sum();
    };
    EXPECT_LT(oracle::gradient_error(fx, Vec(x.row(0).transpose()), Vec(input_grad.row(0).transpose())),
              1e-4);
  }
}

TEST(Gaussian, LogProbMatchesClosedForm) {
  Rng rng(7);
  GaussianPolicy pi = GaussianPolicy::init(2, 2, 8, rng, -0.5);
  Vec s(2), a(2);
  s << 0.3, -0.1;
  a << 0.2, 0.5;
  const Vec mu = pi.mean(s);
  double want = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double sd = std::exp(pi.log_std()[k]);
    want += -0.5 * std::pow((a[k] - mu[k]) / sd, 2) - std::log(sd) - 0.5 * std::log(2 * M_PI);
  }
  EXPECT_NEAR(gaussian_log_prob(pi, s, a), want, 1e-12);
}

TEST(Gaussian, LogStdIsClampedOnSet) {
  Rng rng(1);
  GaussianPolicy pi = GaussianPolicy::init(1, 2, 4, rng, 0.0);
  Vec ls(2);
  ls << -9.0, 4.0;
  pi.set_log_std(ls);
  EXPECT_EQ(pi.log_std()[0], GaussianPolicy::kLogStdMin);
  EXPECT_EQ(pi.log_std()[1], GaussianPolicy::kLogStdMax);
  Vec flat = pi.flat();
  flat[flat.size() - 1] = 10.0;
  pi.set_flat(flat);
  EXPECT_EQ(pi.log_std()[1], GaussianPolicy::kLogStdMax);
}

TEST(Gaussian, SampleMomentsMatchParameters) {
  Rng rng(11);
  GaussianPolicy pi = GaussianPolicy::init(1, 1, 4, rng, std::log(0.5));
  Vec s = Vec::Constant(1, 0.2);
  const double mu = pi.mean(s)[0];
  double m = 0, m2 = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double x = gaussian_sample(pi, s, rng)[0];
    m += x;
    m2 += x * x;
  }
  m /= n;
  const double var = m2 / n - m * m;
  EXPECT_NEAR(m, mu, 0.02);
  EXPECT_NEAR(var, 0.25, 0.02);
}

TEST(Gaussian, LogProbGradientMatchesFiniteDifference) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(200 + seed);
    GaussianPolicy pi = GaussianPolicy::init(3, 2, 5, rng, -0.2);
    Vec flat = pi.flat();
    flat.head(flat.size() - 2) = random_vec(flat.size() - 2, rng, 0.5);
    pi.set_flat(flat);
    const Mat s = random_mat(9, 3, rng), a = random_mat(9, 2, rng);
    const Vec w = random_vec(9, rng);
    LogProbCache cache;
    gaussian_log_prob_batch(pi, s, a, &cache);
    const Vec g = gaussian_log_prob_grad(pi, cache, a, w);
    auto f = [&](const Vec& p) {
      GaussianPolicy q = pi;
      q.set_flat(p);
      return gaussian_log_prob_batch(q, s, a).dot(w);
    };
    EXPECT_LT(oracle::gradient_error(f, pi.flat(), g), 1e-4) << "seed " << seed;
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamState opt(3, 0.01);
  Vec p = Vec::Zero(3);
  Vec g(3);
  g << 1.0, -2.0, 0.5;
  ASSERT_EQ(adam_step(opt, p, g), AdamOutcome::kApplied);
  // With bias correction the first step is lr * sign(g) up to eps.
  EXPECT_NEAR(p[0], -0.01, 1e-9);
  EXPECT_NEAR(p[1], 0.01, 1e-9);
  EXPECT_NEAR(p[2], -0.01, 1e-9);
  EXPECT_EQ(opt.step, 1);
}

TEST(Adam, MatchesHandRolledRecurrence) {
  AdamState opt(1, 0.05);
  Vec p = Vec::Constant(1, 1.0);
  double m = 0, v = 0, x = 1.0;
  for (int t = 1; t <= 50; ++t) {
    const double g = 2 * x - std::sin(t);
    Vec gv = Vec::Constant(1, 2 * p[0] - std::sin(t));
    adam_step(opt, p, gv);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.05 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    ASSERT_NEAR(p[0], x, 1e-12);
  }
}

TEST(Adam, NonFiniteGradientRejectedWithoutSideEffects) {
  AdamState opt(2, 0.01);
  Vec p(2);
  p << 1.0, 2.0;
  Vec g(2);
  g << 0.1, std::nan("");
  EXPECT_EQ(adam_step(opt, p, g), AdamOutcome::kRejectedNonFinite);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 2.0);
  EXPECT_EQ(opt.step, 0);
  EXPECT_EQ(opt.m.squaredNorm(), 0.0);
}

TEST(Adam, ConvergesOnQuadratic) {
  AdamState opt(2, 0.05);
  Vec p(2);
  p << 3.0, -2.0;
  for (int t = 0; t < 2000; ++t) {
    Vec g = 2.0 * (p - Vec::Constant(2, 0.5));
    adam_step(opt, p, g);
  }
  EXPECT_NEAR(p[0], 0.5, 1e-3);
  EXPECT_NEAR(p[1], 0.5, 1e-3);
}

TEST(FiniteDiff, LibraryCheckAgreesOnQuadratic) {
  LossFn f = [](const Vec& p, Vec* g) {
    if (g) *g = 2.0 * p;
    return p.squaredNorm();
  };
  Vec p(3);
  p << 0.5, -1.0, 2.0;
  EXPECT_LT(finite_diff_check(f, p, 1e-5), 1e-6);
  LossFn wrong = [](const Vec& p, Vec* g) {
    if (g) *g = 3.0 * p;
    return p.squaredNorm();
  };
  EXPECT_GT(finite_diff_check(wrong, p, 1e-5), 0.3);
}

// The four training losses, 20 seeds each.
class LossGradient : public ::testing::TestWithParam<int> {};

TEST_P(LossGradient, PolicySurrogate) {
  EXPECT_LT(gradsuite::surrogate_error(GetParam()), 1e-4);
}
TEST_P(LossGradient, ValueRegression) { EXPECT_LT(gradsuite::value_error(GetParam()), 1e-4); }
TEST_P(LossGradient, Discriminator) {
  EXPECT_LT(gradsuite::discriminator_error(GetParam()), 1e-4);
}
TEST_P(LossGradient, DensityModel) { EXPECT_LT(gradsuite::density_error(GetParam()), 1e-4); }

INSTANTIATE_TEST_SUITE_P(Seeds, LossGradient, ::testing::Range(0, 20));

}  // namespace
}  // namespace divmin
