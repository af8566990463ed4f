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

#include "divmin/svpg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace divmin {

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index touches
// only its own agent, so the schedule cannot change results.
template <typename Fn>
void for_each_agent(int n, int workers, Fn&& fn) {
  const int w = std::max(1, std::min(workers, n));
  if (w == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += w) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void ReferenceBox::include(const Mat& features) {
  if (features.rows() == 0) return;
  const Vec lo = features.colwise().minCoeff().transpose();
  const Vec hi = features.colwise().maxCoeff().transpose();
  if (empty()) {
    lo_ = lo;
    hi_ = hi;
    return;
  }
  require(lo.size() == lo_.size(), "reference box: feature width changed");
  lo_ = lo_.cwiseMin(lo);
  hi_ = hi_.cwiseMax(hi);
}

Vec ReferenceBox::lower() const {
  require(!empty(), "reference box: no data");
  const Vec pad = (pad_fraction_ * (hi_ - lo_)).cwiseMax(min_pad_);
  const Vec lo = lo_ - pad;
  require(((hi_ + pad) - lo).minCoeff() > 0.0, "reference box: zero volume");
  return lo;
}

Vec ReferenceBox::upper() const {
  require(!empty(), "reference box: no data");
  const Vec pad = (pad_fraction_ * (hi_ - lo_)).cwiseMax(min_pad_);
  const Vec hi = hi_ + pad;
  require((hi - (lo_ - pad)).minCoeff() > 0.0, "reference box: zero volume");
  return hi;
}

Mat ReferenceBox::sample(Eigen::Index rows, Rng& rng) const {
  const Vec lo = lower();
  const Vec width = upper() - lo;
  Mat out(rows, lo.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < lo.size(); ++c) out(r, c) = lo[c] + width[c] * uniform01(rng);
  }
  return out;
}

DensityModel::DensityModel(int feature_dim, const DensityConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      net_(Mlp::xavier({feature_dim, cfg.hidden, cfg.hidden, 1}, init_rng, 0.1)),
      opt_(net_.params().size(), cfg.lr) {}

Vec DensityModel::logits(const Mat& features) const { return net_.forward(features).col(0); }

std::vector<double> fit_density_model(DensityModel& model, const Mat& agent_features,
                                      const ReferenceBox& reference, int epochs, Rng& rng) {
  if (epochs <= 0) return {};
  require(agent_features.rows() > 0, "fit_density_model: empty agent batch");
  const Mat ref = reference.sample(agent_features.rows(), rng);
  return train_logistic(model.net(), model.optimizer(), agent_features, ref, epochs,
                        model.config().minibatch, rng);
}

Vec pair_ratio(const Vec& logits_i, const Vec& logits_j) {
  require(logits_i.size() == logits_j.size(), "pair_ratio: size mismatch");
  Vec r(logits_i.size());
  // Computed on |gap| and mirrored so that r_ij + r_ji == 1 holds exactly:
  // 1 - p is exact for p in [0.5, 1].
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const double gap = logits_i[k] - logits_j[k];
    const double hi = std::min(sigmoid(std::abs(gap)), 1.0 - kProbClip);
    r[k] = gap >= 0.0 ? hi : 1.0 - hi;
  }
  return r;
}

Vec pair_ratio(const DensityModel& psi_i, const DensityModel& psi_j, const Mat& features) {
  return pair_ratio(psi_i.logits(features), psi_j.logits(features));
}

Vec exploration_reward(const Vec& logits_i, const Vec& logits_j) {
  return pair_ratio(logits_i, logits_j).array().log().matrix();
}

Vec exploration_reward(const DensityModel& psi_i, const DensityModel& psi_j, const Mat& features) {
  return exploration_reward(psi_i.logits(features), psi_j.logits(features));
}

KernelEstimate kernel_from_logits(const std::vector<std::vector<Vec>>& logits, double temperature) {
  require(temperature > 0.0, "kernel: temperature must be positive");
  const auto n = static_cast<Eigen::Index>(logits.size());
  Mat d = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      // Agent i's batch scores log r_ij, agent j's batch scores log r_ji = log(1 - r_ij).
      const double on_i = exploration_reward(logits[ui][ui], logits[uj][ui]).mean();
      const double on_j = exploration_reward(logits[uj][uj], logits[ui][uj]).mean();
      d(i, j) = clamp(0.5 * (kLog4 + on_i + on_j), 0.0, kLog2);
    }
  }
  KernelEstimate out;
  out.divergence = 0.5 * (d + d.transpose());
  out.kernel = (-out.divergence.array() / temperature).exp().matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.divergence(i, i) = 0.0;
    out.kernel(i, i) = 1.0;
  }
  return out;
}

KernelEstimate kernel_matrix(const std::vector<DensityModel>& models,
                             const std::vector<Mat>& eval_features, double temperature) {
  require(models.size() == eval_features.size(), "kernel_matrix: one eval batch per model");
  std::vector<std::vector<Vec>> logits(models.size());
  for (std::size_t j = 0; j < models.size(); ++j) {
    for (const auto& f : eval_features) logits[j].push_back(models[j].logits(f));
  }
  return kernel_from_logits(logits, temperature);
}

std::vector<Vec> svpg_delta(const std::vector<Vec>& driving,
                            const std::vector<std::vector<Vec>>& repulsion, const Mat& kernel,
                            double alpha, double temperature) {
  const auto n = driving.size();
  require(n > 0 && kernel.rows() == static_cast<Eigen::Index>(n) && kernel.cols() == kernel.rows(),
          "svpg_delta: kernel must be n x n");
  require(alpha == 0.0 || repulsion.size() == n, "svpg_delta: repulsion must be n x n");
  require(temperature > 0.0, "svpg_delta: temperature must be positive");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec d = Vec::Zero(driving[i].size());
    for (std::size_t j = 0; j < n; ++j) {
      require(driving[j].size() == d.size(), "svpg_delta: gradient shape mismatch");
      const double k = kernel(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      d += k * driving[j];
      if (alpha != 0.0 && j != i) {
        require(repulsion[i][j].size() == d.size(), "svpg_delta: repulsion shape mismatch");
        d += alpha * (k / temperature) * repulsion[i][j];
      }
    }
    out.push_back(d / static_cast<double>(n));
  }
  return out;
}

Mat rbf_kernel(const std::vector<Vec>& params, double* bandwidth) {
  const auto n = static_cast<Eigen::Index>(params.size());
  Mat sq = Mat::Zero(n, n);
  std::vector<double> off;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (params[static_cast<std::size_t>(i)] - params[static_cast<std::size_t>(j)])
                           .squaredNorm();
      sq(i, j) = sq(j, i) = v;
      off.push_back(v);
    }
  }
  double h = 1.0;
  if (!off.empty()) {
    std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2), off.end());
    const double med = off[off.size() / 2];
    if (med > 0.0) h = med / std::log(static_cast<double>(n) + 1.0);
  }
  if (bandwidth != nullptr) *bandwidth = h;
  return (-sq.array() / h).exp().matrix();
}

std::vector<Vec> rbf_repulsion(const std::vector<Vec>& params, const Mat& kernel, double bandwidth) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Vec r = Vec::Zero(params[i].size());
    for (std::size_t j = 0; j < params.size(); ++j) {
      if (i == j) continue;
      const double k = kernel(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      r += (2.0 * k / bandwidth) * (params[i] - params[j]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void EnsembleConfig::validate() const {
  require(agents >= 1, "ensemble: need at least one agent");
  require(temperature > 0.0, "ensemble: temperature must be positive");
  require(alpha0 >= 0.0, "ensemble: alpha0 must be non-negative");
  require(alpha_decay_end > 0.0 && alpha_decay_end <= 1.0, "ensemble: alpha_decay_end must lie in (0, 1]");
  require(workers >= 1, "ensemble: workers must be positive");
  require(density.hidden >= 1 && density.minibatch >= 1 && density.epochs >= 0 && density.lr > 0.0,
          "ensemble: bad density settings");
  ppo.validate();
}

double EnsembleConfig::alpha_at(int t) const {
  const double end = alpha_decay_end * ppo.iterations;
  if (static_cast<double>(t) >= end) return 0.0;
  return alpha0 * (1.0 - static_cast<double>(t) / end);
}

std::string to_string(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::kInteractJS: return "si-interact-js";
    case EnsembleMode::kInteractRBF: return "si-interact-rbf";
    case EnsembleMode::kIndependent: return "si-independent";
  }
  return "unknown";
}

EnsembleResult train_ensemble(const EnvFactory& make_env, const EnsembleConfig& cfg,
                              std::uint64_t seed, const EnsembleObserver& observer) {
  cfg.validate();
  const int n = cfg.agents;
  const auto un = static_cast<std::size_t>(n);
  EnsembleResult out;
  std::vector<Rng> density_rng;
  const std::uint64_t dseed = stream_seed(seed, SeedStream::kDensity);
  for (int i = 0; i < n; ++i) {
    const auto env = make_env(agent_seed(seed, i));
    out.agents.push_back(std::make_unique<SelfImitationAgent>(*env, cfg.ppo, true, agent_seed(seed, i)));
    density_rng.emplace_back(derive_seed(dseed, static_cast<std::uint64_t>(i)));
    const int fdim = env->obs_dim() + env->act_dim();
    out.density_models.emplace_back(fdim, cfg.density, density_rng.back());
  }
  ReferenceBox box;
  std::vector<Mat> features(un);
  std::vector<std::vector<Vec>> logits(un, std::vector<Vec>(un));
  std::vector<Vec> grads(un);
  std::vector<std::uint8_t> finite(un);

  for (int t = 0; t < cfg.ppo.iterations; ++t) {
    EnsembleIteration rec;
    for_each_agent(n, cfg.workers, [&](int i) { out.agents[static_cast<std::size_t>(i)]->collect(); });
    for (std::size_t i = 0; i < un; ++i) {
      features[i] = out.agents[i]->batch().pairs().features();
      box.include(features[i]);
    }
    for_each_agent(n, cfg.workers, [&](int i) {
      const auto ui = static_cast<std::size_t>(i);
      fit_density_model(out.density_models[ui], features[ui], box, cfg.density.epochs, density_rng[ui]);
    });
    for_each_agent(n, cfg.workers, [&](int j) {
      const auto uj = static_cast<std::size_t>(j);
      for (std::size_t i = 0; i < un; ++i) logits[uj][i] = out.density_models[uj].logits(features[i]);
    });
    const KernelEstimate est = kernel_from_logits(logits, cfg.temperature);
    rec.kernel = est.kernel;
    rec.alpha = cfg.mode == EnsembleMode::kIndependent ? 0.0 : cfg.alpha_at(t);
    switch (cfg.mode) {
      case EnsembleMode::kInteractJS: rec.applied_kernel = est.kernel; break;
      case EnsembleMode::kIndependent: rec.applied_kernel = Mat::Identity(n, n); break;
      case EnsembleMode::kInteractRBF: rec.applied_kernel = Mat::Identity(n, n); break;
    }
    const bool js_repulsion = cfg.mode == EnsembleMode::kInteractJS && rec.alpha > 0.0 && n > 1;

    for_each_agent(n, cfg.workers, [&](int i) {
      const auto ui = static_cast<std::size_t>(i);
      auto& agent = *out.agents[ui];
      agent.prepare_update();
      if (js_repulsion) {
        std::vector<Vec> rewards;
        for (std::size_t j = 0; j < un; ++j) {
          if (j != ui) rewards.push_back(exploration_reward(logits[ui][ui], logits[j][ui]));
        }
        agent.set_extra_streams(rewards);
      }
    });

    int steps = 0;
    for (const auto& a : out.agents) steps = std::max(steps, a->minibatch_count());
    std::vector<std::uint8_t> zeroed(un, 0);
    for (int e = 0; e < cfg.ppo.epochs; ++e) {
      for (int m = 0; m < steps; ++m) {
        for_each_agent(n, cfg.workers, [&](int i) {
          const auto ui = static_cast<std::size_t>(i);
          grads[ui] = out.agents[ui]->driving_gradient(e, m);
          finite[ui] = all_finite(grads[ui]) ? 1 : 0;
          if (!finite[ui]) zeroed[ui] = 1;
        });
        Mat kernel = rec.applied_kernel;
        std::vector<Vec> rbf_rep;
        if (cfg.mode == EnsembleMode::kInteractRBF) {
          std::vector<Vec> params;
          for (const auto& a : out.agents) params.push_back(a->policy().flat());
          double h = 1.0;
          kernel = rbf_kernel(params, &h);
          if (rec.alpha > 0.0) rbf_rep = rbf_repulsion(params, kernel, h);
          rec.applied_kernel = kernel;
        }
        for_each_agent(n, cfg.workers, [&](int i) {
          const auto ui = static_cast<std::size_t>(i);
          auto& agent = *out.agents[ui];
          Vec dir = Vec::Zero(grads[ui].size());
          bool first = true;
          for (std::size_t j = 0; j < un; ++j) {
            const double k = kernel(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            if (k == 0.0 || !finite[j]) continue;
            if (first) {
              dir = k * grads[j];
              first = false;
            } else {
              dir += k * grads[j];
            }
          }
          if (js_repulsion) {
            std::vector<double> coeffs;
            for (std::size_t j = 0; j < un; ++j) {
              if (j == ui) continue;
              coeffs.push_back(kernel(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) /
                               cfg.temperature);
            }
            dir += rec.alpha * agent.extra_stream_gradient(e, m, coeffs);
          } else if (!rbf_rep.empty()) {
            dir += rec.alpha * rbf_rep[ui];
          }
          agent.apply_direction(dir);
          agent.regress_values(e, m);
        });
      }
    }
    for_each_agent(n, cfg.workers, [&](int i) {
      out.agents[static_cast<std::size_t>(i)]->update_discriminator();
    });
    for (auto& a : out.agents) rec.agents.push_back(a->finish_iteration());
    for (auto z : zeroed) rec.zeroed_agents += z;
    if (n > 1) {
      double sum = 0.0, mn = 1.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          sum += rec.kernel(i, j);
          mn = std::min(mn, rec.kernel(i, j));
        }
      }
      rec.kernel_offdiag_mean = sum / (static_cast<double>(n) * (n - 1));
      rec.kernel_offdiag_min = mn;
    }
    if (observer) observer(rec);
    out.history.push_back(std::move(rec));
  }
  return out;
}

}  // namespace divmin
