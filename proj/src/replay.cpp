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

#include "divmin/replay.hpp"

#include <algorithm>

#include "json.hpp"

namespace divmin {

Mat PairBatch::features() const {
  Mat out(states.rows(), states.cols() + actions.cols());
  out << states, actions;
  return out;
}

PriorityReplay::PriorityReplay(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "replay: capacity must be positive");
}

double PriorityReplay::threshold() const {
  if (!full()) return -std::numeric_limits<double>::infinity();
  return entries_.back().total_return;
}

bool PriorityReplay::offer(const Trajectory& trajectory) {
  require(trajectory.length() >= 1, "replay: trajectory must be non-empty");
  if (full()) {
    if (!(trajectory.total_return > threshold())) return false;
    transitions_ -= static_cast<std::size_t>(entries_.back().length());
    entries_.pop_back();
    ++evictions_;
  }
  // Insert after existing equal returns so older entries keep their rank.
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), trajectory.total_return,
                              [](double r, const Trajectory& t) { return r > t.total_return; });
  entries_.insert(pos, trajectory);
  transitions_ += static_cast<std::size_t>(trajectory.length());
  return true;
}

std::optional<PairBatch> PriorityReplay::sample_pairs(std::size_t batch_size, Rng& rng) const {
  if (entries_.empty()) return std::nullopt;
  const auto sdim = entries_.front().states.cols();
  const auto adim = entries_.front().actions.cols();
  PairBatch batch{Mat(static_cast<Eigen::Index>(batch_size), sdim),
                  Mat(static_cast<Eigen::Index>(batch_size), adim)};
  std::vector<std::size_t> cumulative;
  cumulative.reserve(entries_.size());
  std::size_t acc = 0;
  for (const auto& t : entries_) {
    acc += static_cast<std::size_t>(t.length());
    cumulative.push_back(acc);
  }
  std::uniform_int_distribution<std::size_t> pick(0, acc - 1);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const std::size_t g = pick(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), g);
    const auto ti = static_cast<std::size_t>(it - cumulative.begin());
    const std::size_t offset = ti == 0 ? 0 : cumulative[ti - 1];
    const auto row = static_cast<Eigen::Index>(g - offset);
    batch.states.row(static_cast<Eigen::Index>(k)) = entries_[ti].states.row(row);
    batch.actions.row(static_cast<Eigen::Index>(k)) = entries_[ti].actions.row(row);
  }
  return batch;
}

void PriorityReplay::dump_jsonl(std::ostream& out, bool with_transitions) const {
  for (const auto& t : entries_) {
    nlohmann::json j;
    j["return"] = t.total_return;
    j["length"] = t.length();
    if (with_transitions) {
      nlohmann::json steps = nlohmann::json::array();
      for (int k = 0; k < t.length(); ++k) {
        std::vector<double> s(t.states.row(k).begin(), t.states.row(k).end());
        std::vector<double> a(t.actions.row(k).begin(), t.actions.row(k).end());
        steps.push_back({{"state", s}, {"action", a}, {"reward", t.rewards[static_cast<std::size_t>(k)]},
                         {"done", t.dones[static_cast<std::size_t>(k)] != 0}});
      }
      j["transitions"] = std::move(steps);
    }
    out << j.dump() << "\n";
  }
}

}  // namespace divmin
