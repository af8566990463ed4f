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

// DIVMIN1 parameter container.
//
//   DIVMIN1
//   entries <N>
//   <key> <rows> <cols>
//   <rows lines of cols hex-float values>
//   ... (N records)
//   end
//
// Values are written with %a so a save/load cycle is bitwise exact. Keys may
// not contain whitespace.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "divmin/gaussian.hpp"

namespace divmin {

inline constexpr std::string_view kCheckpointMagic = "DIVMIN1";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointEntry {
  std::string key;
  Mat value;
};

class Checkpoint {
 public:
  void put(const std::string& key, Mat value);
  void put_vec(const std::string& key, const Vec& value);
  bool has(const std::string& key) const;
  const Mat& get(const std::string& key) const;
  Vec get_vec(const std::string& key) const;
  const std::vector<CheckpointEntry>& entries() const { return entries_; }

 private:
  std::vector<CheckpointEntry> entries_;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void put_mlp(Checkpoint& ckpt, const std::string& prefix, const Mlp& net);
Mlp get_mlp(const Checkpoint& ckpt, const std::string& prefix);
void put_policy(Checkpoint& ckpt, const std::string& prefix, const GaussianPolicy& policy);
GaussianPolicy get_policy(const Checkpoint& ckpt, const std::string& prefix);

}  // namespace divmin
