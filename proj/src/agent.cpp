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

#include "divmin/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace divmin {

SelfImitationAgent::SelfImitationAgent(const Env& env, const PPOConfig& cfg, bool self_imitation,
                                       std::uint64_t seed)
    : cfg_(cfg),
      self_imitation_(self_imitation),
      seed_(seed),
      env_(env.clone()),
      rollout_rng_(stream_seed(seed, SeedStream::kRollout)),
      shuffle_rng_(stream_seed(seed, SeedStream::kShuffle)),
      disc_rng_(stream_seed(seed, SeedStream::kDiscriminator)),
      explore_rng_(stream_seed(seed, SeedStream::kExplore)),
      replay_(cfg.capacity) {
  cfg_.validate();
  Rng init(stream_seed(seed, SeedStream::kInit));
  const int sdim = env_->obs_dim();
  const int adim = env_->act_dim();
  policy_ = GaussianPolicy::init(sdim, adim, cfg_.hidden, init, cfg_.init_log_std);
  policy_opt_ = AdamState(policy_.param_count(), cfg_.lr);
  const MlpShape vshape{sdim, cfg_.hidden, cfg_.hidden, 1};
  values_.env = Mlp::xavier(vshape, init);
  values_.shaped = Mlp::xavier(vshape, init);
  env_value_opt_ = AdamState(vshape.param_count(), cfg_.value_lr);
  shaped_value_opt_ = AdamState(vshape.param_count(), cfg_.value_lr);
  if (self_imitation_) disc_ = std::make_unique<Discriminator>(sdim, adim, cfg_.disc, init);
}

void SelfImitationAgent::collect() {
  ++iteration_;
  stats_ = IterationStats{};
  stats_.iteration = iteration_;
  const Discriminator* d = (disc_ && disc_->updates() > 0) ? disc_.get() : nullptr;
  batch_ = collect_rollouts(*env_, policy_, d, cfg_.batch_episodes, rollout_rng_);
  if (self_imitation_) {
    for (const auto& t : batch_.trajectories) replay_.offer(t);
  }
}

void SelfImitationAgent::prepare_update() {
  const Eigen::Index n = batch_.size();
  const Vec v_env = values_.env.forward(batch_.states).col(0);
  GaeResult g1 = batch_gae(batch_, batch_.env_rewards, v_env, cfg_.gamma, cfg_.lambda);
  adv_.env = std::move(g1.advantages);
  adv_.env_targets = std::move(g1.targets);
  normalize_advantages(adv_.env);
  // The shaped stream stays silent until the discriminator has been trained
  // at least once.
  if (disc_ && disc_->updates() > 0) {
    const Vec v_sh = values_.shaped.forward(batch_.states).col(0);
    GaeResult g2 = batch_gae(batch_, batch_.shaped_rewards, v_sh, cfg_.gamma, cfg_.lambda);
    adv_.shaped = std::move(g2.advantages);
    adv_.shaped_targets = std::move(g2.targets);
    normalize_advantages(adv_.shaped);
  } else {
    adv_.shaped = Vec::Zero(n);
    adv_.shaped_targets.resize(0);
  }

  const auto mb = static_cast<Eigen::Index>(cfg_.minibatch);
  const Eigen::Index count = (n + mb - 1) / mb;
  minibatches_.clear();
  minibatches_.reserve(static_cast<std::size_t>(count * cfg_.epochs));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (int e = 0; e < cfg_.epochs; ++e) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), shuffle_rng_);
    for (Eigen::Index m = 0; m < count; ++m) {
      const Eigen::Index lo = m * mb;
      const Eigen::Index len = std::min(mb, n - lo);
      Minibatch b;
      b.rows.assign(perm.begin() + lo, perm.begin() + lo + len);
      b.states.resize(len, batch_.states.cols());
      b.actions.resize(len, batch_.actions.cols());
      b.old_log_probs.resize(len);
      b.adv_env.resize(len);
      b.adv_shaped.resize(len);
      b.env_targets.resize(len);
      const bool shaped_targets = adv_.shaped_targets.size() == n;
      if (shaped_targets) b.shaped_targets.resize(len);
      for (Eigen::Index k = 0; k < len; ++k) {
        const Eigen::Index r = b.rows[static_cast<std::size_t>(k)];
        b.states.row(k) = batch_.states.row(r);
        b.actions.row(k) = batch_.actions.row(r);
        b.old_log_probs[k] = batch_.log_probs[r];
        b.adv_env[k] = adv_.env[r];
        b.adv_shaped[k] = adv_.shaped[r];
        b.env_targets[k] = adv_.env_targets[r];
        if (shaped_targets) b.shaped_targets[k] = adv_.shaped_targets[r];
      }
      minibatches_.push_back(std::move(b));
    }
  }
  extra_adv_.clear();
  extra_targets_.clear();
}

const SelfImitationAgent::Minibatch& SelfImitationAgent::minibatch(int epoch, int mb) const {
  const int count = minibatch_count();
  require(epoch >= 0 && epoch < cfg_.epochs && count > 0, "agent: minibatch out of range");
  return minibatches_[static_cast<std::size_t>(epoch * count + (mb % count))];
}

Vec SelfImitationAgent::driving_gradient(int epoch, int mb) const {
  const Minibatch& b = minibatch(epoch, mb);
  return interpolated_policy_gradient(policy_, b.states, b.actions, b.old_log_probs, b.adv_env,
                                      b.adv_shaped, self_imitation_ ? cfg_.nu : 0.0, cfg_.clip);
}

Vec SelfImitationAgent::extra_stream_gradient(int epoch, int mb,
                                              std::span<const double> coeffs) const {
  require(coeffs.size() == extra_adv_.size(), "agent: one coefficient per extra stream");
  const Minibatch& b = minibatch(epoch, mb);
  const auto len = static_cast<Eigen::Index>(b.rows.size());
  std::vector<Vec> adv(extra_adv_.size(), Vec(len));
  std::vector<const Vec*> ptrs;
  for (std::size_t s = 0; s < extra_adv_.size(); ++s) {
    for (Eigen::Index k = 0; k < len; ++k) adv[s][k] = extra_adv_[s][b.rows[static_cast<std::size_t>(k)]];
    ptrs.push_back(&adv[s]);
  }
  if (ptrs.empty()) return Vec::Zero(static_cast<Eigen::Index>(policy_.param_count()));
  return stream_policy_gradient(policy_, b.states, b.actions, b.old_log_probs, ptrs, coeffs,
                                cfg_.clip);
}

AdamOutcome SelfImitationAgent::apply_direction(const Vec& direction) {
  Vec flat = policy_.flat();
  const AdamOutcome out = adam_step(policy_opt_, flat, -direction);
  if (out == AdamOutcome::kApplied) {
    policy_.set_flat(flat);
  } else {
    ++stats_.rejected_steps;
  }
  return out;
}

void SelfImitationAgent::regress_values(int epoch, int mb) {
  const Minibatch& b = minibatch(epoch, mb);
  Vec grad;
  value_loss(values_.env, b.states, b.env_targets, &grad);
  adam_step(env_value_opt_, values_.env.params(), grad);
  if (b.shaped_targets.size() == b.states.rows()) {
    value_loss(values_.shaped, b.states, b.shaped_targets, &grad);
    adam_step(shaped_value_opt_, values_.shaped.params(), grad);
  }
  if (!extra_targets_.empty()) {
    const auto len = static_cast<Eigen::Index>(b.rows.size());
    const auto heads = static_cast<Eigen::Index>(extra_targets_.size());
    MlpCache cache;
    Mat diff = extra_values_->forward(b.states, &cache);
    for (Eigen::Index s = 0; s < heads; ++s) {
      for (Eigen::Index k = 0; k < len; ++k) {
        diff(k, s) -= extra_targets_[static_cast<std::size_t>(s)][b.rows[static_cast<std::size_t>(k)]];
      }
    }
    adam_step(*extra_value_opt_, extra_values_->params(),
              extra_values_->backward(cache, diff / static_cast<double>(len)));
  }
}

void SelfImitationAgent::set_extra_streams(const std::vector<Vec>& rewards) {
  const int heads = static_cast<int>(rewards.size());
  if (heads > 0 && (!extra_values_ || extra_values_->shape().out != heads)) {
    const MlpShape vshape{env_->obs_dim(), cfg_.hidden, cfg_.hidden, heads};
    extra_values_ = Mlp::xavier(vshape, explore_rng_);
    extra_value_opt_.emplace(vshape.param_count(), cfg_.value_lr);
  }
  extra_adv_.clear();
  extra_targets_.clear();
  if (heads == 0) return;
  const Mat v = extra_values_->forward(batch_.states);
  for (int s = 0; s < heads; ++s) {
    GaeResult g = batch_gae(batch_, rewards[static_cast<std::size_t>(s)], v.col(s), cfg_.gamma,
                            cfg_.lambda);
    normalize_advantages(g.advantages);
    extra_adv_.push_back(std::move(g.advantages));
    extra_targets_.push_back(std::move(g.targets));
  }
}

void SelfImitationAgent::update_discriminator() {
  if (!disc_ || replay_.empty()) return;
  const PairBatch policy_pairs = batch_.pairs();
  const auto replay_pairs =
      replay_.sample_pairs(static_cast<std::size_t>(policy_pairs.size()), disc_rng_);
  train_discriminator(*disc_, policy_pairs, *replay_pairs, cfg_.disc.epochs, disc_rng_);
  stats_.js_estimate = js_estimate(*disc_, policy_pairs, *replay_pairs);
}

IterationStats SelfImitationAgent::finish_iteration() {
  const auto eps = static_cast<double>(batch_.episodes());
  double sum = 0.0, sq = 0.0, obs = 0.0, succ = 0.0;
  for (int e = 0; e < batch_.episodes(); ++e) {
    const auto k = static_cast<std::size_t>(e);
    sum += batch_.true_returns[k];
    sq += batch_.true_returns[k] * batch_.true_returns[k];
    obs += batch_.observed_returns[k];
    succ += batch_.episode_reached_goal[k];
  }
  stats_.return_mean = sum / eps;
  stats_.return_std = std::sqrt(std::max(0.0, sq / eps - stats_.return_mean * stats_.return_mean));
  stats_.observed_return_mean = obs / eps;
  stats_.success_rate = succ / eps;
  double goal_steps = 0.0;
  for (auto g : batch_.goals) goal_steps += g;
  stats_.goal_fraction = goal_steps / static_cast<double>(batch_.size());
  stats_.shaped_reward_mean = batch_.shaped_rewards.size() > 0 ? batch_.shaped_rewards.mean() : 0.0;
  stats_.replay_threshold = replay_.threshold();
  stats_.replay_size = static_cast<int>(replay_.size());
  stats_.log_std_mean = policy_.log_std().mean();
  return stats_;
}

TrainResult train_self_imitation(const Env& env, const PPOConfig& cfg, std::uint64_t seed,
                                 bool self_imitation, const IterationObserver& observer) {
  auto agent = std::make_unique<SelfImitationAgent>(env, cfg, self_imitation, seed);
  TrainResult out;
  out.history.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    agent->collect();
    agent->prepare_update();
    const int count = agent->minibatch_count();
    for (int e = 0; e < cfg.epochs; ++e) {
      for (int m = 0; m < count; ++m) {
        agent->apply_direction(agent->driving_gradient(e, m));
        agent->regress_values(e, m);
      }
    }
    agent->update_discriminator();
    out.history.push_back(agent->finish_iteration());
    if (observer) observer(out.history.back());
  }
  out.policy = agent->policy();
  out.agent = std::move(agent);
  return out;
}

double final_window_score(const std::vector<IterationStats>& history) {
  require(!history.empty(), "final_window_score: empty history");
  const std::size_t n = history.size();
  const std::size_t w = std::max<std::size_t>(1, (n + 9) / 10);
  double sum = 0.0;
  for (std::size_t k = n - w; k < n; ++k) sum += history[k].return_mean;
  return sum / static_cast<double>(w);
}

}  // namespace divmin
