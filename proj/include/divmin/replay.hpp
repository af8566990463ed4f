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

#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "divmin/trajectory.hpp"

namespace divmin {

/// A batch of state-action pairs, one per row.
struct PairBatch {
  Mat states;
  Mat actions;

  Eigen::Index size() const { return states.rows(); }
  /// [state, action] concatenated per row.
  Mat features() const;
};

/// Capacity-bounded store of the highest-return trajectories seen so far,
/// kept sorted by non-increasing total return. Once full, a new trajectory is
/// admitted only when its return strictly exceeds the current minimum.
class PriorityReplay {
 public:
  explicit PriorityReplay(std::size_t capacity);

  bool offer(const Trajectory& trajectory);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool full() const { return entries_.size() == capacity_; }
  std::size_t total_transitions() const { return transitions_; }
  std::size_t evictions() const { return evictions_; }
  /// Minimum stored return when full, -infinity otherwise.
  double threshold() const;
  const std::vector<Trajectory>& entries() const { return entries_; }

  /// Pairs drawn uniformly over all stored transitions. Returns nullopt when
  /// the replay is empty.
  std::optional<PairBatch> sample_pairs(std::size_t batch_size, Rng& rng) const;

  /// One JSON object per trajectory: return, length and optionally the
  /// transitions.
  void dump_jsonl(std::ostream& out, bool with_transitions) const;

 private:
  std::size_t capacity_;
  std::vector<Trajectory> entries_;
  std::size_t transitions_ = 0;
  std::size_t evictions_ = 0;
};

}  // namespace divmin
