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

#include "divmin/ppo.hpp"

#include <cmath>

namespace divmin {

void PPOConfig::validate() const {
  require(gamma > 0.0 && gamma <= 1.0, "ppo: gamma must lie in (0, 1]");
  require(lambda >= 0.0 && lambda <= 1.0, "ppo: lambda must lie in [0, 1]");
  require(nu >= 0.0 && nu <= 1.0, "ppo: nu must lie in [0, 1]");
  require(clip > 0.0, "ppo: clip must be positive");
  require(epochs >= 1 && minibatch >= 1, "ppo: epochs and minibatch must be positive");
  require(lr > 0.0 && value_lr > 0.0, "ppo: learning rates must be positive");
  require(iterations >= 1 && batch_episodes >= 1, "ppo: iterations and batch_episodes must be positive");
  require(capacity >= 1, "ppo: capacity must be positive");
  require(hidden >= 1 && disc.hidden >= 1, "ppo: hidden widths must be positive");
  require(disc.minibatch >= 1 && disc.epochs >= 0 && disc.lr > 0.0, "ppo: bad discriminator settings");
}

GaeResult compute_gae(const Vec& rewards, const Vec& values, double bootstrap, double gamma,
                      double lambda) {
  require(rewards.size() == values.size(), "compute_gae: rewards and values differ in length");
  const Eigen::Index n = rewards.size();
  GaeResult out{Vec(n), Vec(n)};
  double next_value = bootstrap;
  double running = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    next_value = values[t];
  }
  out.targets = out.advantages + values;
  return out;
}

void normalize_advantages(Vec& adv) {
  if (adv.size() == 0) return;
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().mean();
  const double sd = std::sqrt(var);
  if (!(sd >= 1e-8)) return;
  adv = ((adv.array() - mean) / sd).matrix();
}

double clipped_surrogate(const Vec& ratio, const Vec& adv, double clip) {
  require(ratio.size() == adv.size() && ratio.size() > 0, "clipped_surrogate: size mismatch");
  double total = 0.0;
  for (Eigen::Index k = 0; k < ratio.size(); ++k) {
    const double r = ratio[k];
    const double rc = clamp(r, 1.0 - clip, 1.0 + clip);
    total += std::min(r * adv[k], rc * adv[k]);
  }
  return total / static_cast<double>(ratio.size());
}

Vec surrogate_weights(const Vec& ratio, const Vec& adv, double clip) {
  require(ratio.size() == adv.size(), "surrogate_weights: size mismatch");
  Vec w(ratio.size());
  for (Eigen::Index k = 0; k < ratio.size(); ++k) {
    const double a = adv[k];
    const double r = ratio[k];
    const bool active = a >= 0.0 ? r <= 1.0 + clip : r >= 1.0 - clip;
    w[k] = active ? a * r : 0.0;
  }
  return w;
}

RolloutBatch collect_rollouts(Env& env, const GaussianPolicy& policy, const Discriminator* disc,
                              int episodes, Rng& rng) {
  require(episodes >= 1, "collect_rollouts: need at least one episode");
  const int sdim = env.obs_dim();
  const int adim = env.act_dim();
  std::vector<double> st, ac, r1, lp, tr;
  RolloutBatch batch;
  batch.episode_starts.push_back(0);
  const Vec sigma = policy.log_std().array().exp().matrix();
  const double log_norm = -policy.log_std().sum() - kHalfLog2Pi * adim;
  for (int e = 0; e < episodes; ++e) {
    TrajectoryBuilder builder(sdim, adim);
    Vec obs = env.reset(rng);
    double true_return = 0.0;
    bool reached = false;
    while (true) {
      const Vec mean = policy.mean(obs);
      Vec action(adim);
      double quad = 0.0;
      for (int d = 0; d < adim; ++d) {
        const double z = standard_normal(rng);
        action[d] = mean[d] + sigma[d] * z;
        quad += z * z;
      }
      const StepResult res = env.step(action);
      st.insert(st.end(), obs.data(), obs.data() + sdim);
      ac.insert(ac.end(), action.data(), action.data() + adim);
      r1.push_back(res.reward);
      tr.push_back(res.true_reward);
      lp.push_back(log_norm - 0.5 * quad);
      batch.dones.push_back(res.done ? 1 : 0);
      batch.goals.push_back(res.goal ? 1 : 0);
      builder.append(obs, action, res.reward, res.done);
      true_return += res.true_reward;
      reached = reached || res.goal;
      obs = res.observation;
      if (res.done) break;
    }
    batch.trajectories.push_back(builder.finish());
    batch.observed_returns.push_back(batch.trajectories.back().total_return);
    batch.true_returns.push_back(true_return);
    batch.episode_reached_goal.push_back(reached ? 1 : 0);
    batch.episode_starts.push_back(static_cast<Eigen::Index>(r1.size()));
  }
  const auto n = static_cast<Eigen::Index>(r1.size());
  batch.states = Eigen::Map<Mat>(st.data(), n, sdim);
  batch.actions = Eigen::Map<Mat>(ac.data(), n, adim);
  batch.env_rewards = Eigen::Map<Vec>(r1.data(), n);
  batch.true_rewards = Eigen::Map<Vec>(tr.data(), n);
  batch.log_probs = Eigen::Map<Vec>(lp.data(), n);
  batch.shaped_rewards = disc != nullptr ? shaped_rewards(*disc, batch.pairs().features())
                                         : Vec(Vec::Zero(n));
  return batch;
}

GaeResult batch_gae(const RolloutBatch& batch, const Vec& rewards, const Vec& values, double gamma,
                    double lambda) {
  require(rewards.size() == batch.size() && values.size() == batch.size(),
          "batch_gae: stream length differs from batch");
  GaeResult out{Vec(batch.size()), Vec(batch.size())};
  for (std::size_t e = 0; e + 1 < batch.episode_starts.size(); ++e) {
    const Eigen::Index a = batch.episode_starts[e];
    const Eigen::Index len = batch.episode_starts[e + 1] - a;
    const GaeResult g = compute_gae(rewards.segment(a, len), values.segment(a, len), 0.0, gamma,
                                    lambda);
    out.advantages.segment(a, len) = g.advantages;
    out.targets.segment(a, len) = g.targets;
  }
  return out;
}

Vec stream_policy_gradient(const GaussianPolicy& policy, const Mat& states, const Mat& actions,
                           const Vec& old_log_probs, std::span<const Vec* const> advantages,
                           std::span<const double> coeffs, double clip) {
  require(advantages.size() == coeffs.size() && !advantages.empty(),
          "stream_policy_gradient: one coefficient per stream");
  require(states.rows() > 0 && old_log_probs.size() == states.rows(),
          "stream_policy_gradient: bad minibatch");
  LogProbCache cache;
  const Vec logp = gaussian_log_prob_batch(policy, states, actions, &cache);
  const Vec ratio = (logp - old_log_probs).array().exp().matrix();
  Vec weights = Vec::Zero(states.rows());
  for (std::size_t s = 0; s < advantages.size(); ++s) {
    require(advantages[s]->size() == states.rows(), "stream_policy_gradient: advantage length");
    weights += coeffs[s] * surrogate_weights(ratio, *advantages[s], clip);
  }
  weights /= static_cast<double>(states.rows());
  return gaussian_log_prob_grad(policy, cache, actions, weights);
}

Vec interpolated_policy_gradient(const GaussianPolicy& policy, const Mat& states,
                                 const Mat& actions, const Vec& old_log_probs,
                                 const Vec& adv_env, const Vec& adv_shaped, double nu,
                                 double clip) {
  const Vec* streams[] = {&adv_env, &adv_shaped};
  const double coeffs[] = {1.0 - nu, nu};
  return stream_policy_gradient(policy, states, actions, old_log_probs, streams, coeffs, clip);
}

double value_loss(const Mlp& value, const Mat& states, const Vec& targets, Vec* grad) {
  require(states.rows() == targets.size() && states.rows() > 0, "value_loss: size mismatch");
  MlpCache cache;
  const Mat v = value.forward(states, grad ? &cache : nullptr);
  const Vec diff = v.col(0) - targets;
  const double n = static_cast<double>(states.rows());
  if (grad != nullptr) {
    const Mat g = diff / n;
    *grad = value.backward(cache, g);
  }
  return 0.5 * diff.squaredNorm() / n;
}

EvalResult evaluate_policy(Env& env, const GaussianPolicy& policy, int episodes, Rng& rng) {
  const RolloutBatch batch = collect_rollouts(env, policy, nullptr, episodes, rng);
  EvalResult out;
  const auto n = static_cast<double>(episodes);
  double sum = 0.0, sq = 0.0, succ = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const double r = batch.true_returns[static_cast<std::size_t>(e)];
    sum += r;
    sq += r * r;
    succ += batch.episode_reached_goal[static_cast<std::size_t>(e)];
  }
  out.mean_return = sum / n;
  out.std_return = std::sqrt(std::max(0.0, sq / n - out.mean_return * out.mean_return));
  out.success_rate = succ / n;
  double goal_steps = 0.0;
  for (auto g : batch.goals) goal_steps += g;
  out.goal_fraction = goal_steps / static_cast<double>(batch.size());
  out.trajectories = batch.trajectories;
  return out;
}

}  // namespace divmin
