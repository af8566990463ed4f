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

#include "divmin/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace divmin {

void Checkpoint::put(const std::string& key, Mat value) {
  require(!key.empty() && key.find_first_of(" \t\r\n") == std::string::npos,
          "checkpoint: keys must be non-empty and free of whitespace");
  for (auto& e : entries_) {
    if (e.key == key) {
      e.value = std::move(value);
      return;
    }
  }
  entries_.push_back({key, std::move(value)});
}

void Checkpoint::put_vec(const std::string& key, const Vec& value) {
  put(key, Mat(value.transpose()));
}

bool Checkpoint::has(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return true;
  }
  return false;
}

const Mat& Checkpoint::get(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return e.value;
  }
  throw CheckpointError("checkpoint: missing entry '" + key + "'");
}

Vec Checkpoint::get_vec(const std::string& key) const {
  const Mat& m = get(key);
  return Eigen::Map<const Vec>(m.data(), m.size());
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out;
  out.reserve(64);
  out += kCheckpointMagic;
  out += "\nentries " + std::to_string(ckpt.entries().size()) + "\n";
  char buf[64];
  for (const auto& e : ckpt.entries()) {
    out += e.key + " " + std::to_string(e.value.rows()) + " " + std::to_string(e.value.cols()) + "\n";
    for (Eigen::Index r = 0; r < e.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < e.value.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), c == 0 ? "%a" : " %a", e.value(r, c));
        out += buf;
      }
      out += "\n";
    }
  }
  out += "end\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string magic;
  if (!(in >> magic)) throw CheckpointError("checkpoint: empty payload");
  if (magic != kCheckpointMagic) {
    if (magic.rfind("DIVMIN", 0) == 0) {
      throw CheckpointError("checkpoint: unsupported version " + magic + " (expected " +
                            std::string(kCheckpointMagic) + ")");
    }
    throw CheckpointError("checkpoint: bad magic header");
  }
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "entries") {
    throw CheckpointError("checkpoint: missing entry count");
  }
  Checkpoint ckpt;
  for (std::size_t i = 0; i < count; ++i) {
    std::string key;
    long rows = -1, cols = -1;
    if (!(in >> key >> rows >> cols) || rows < 0 || cols < 0) {
      throw CheckpointError("checkpoint: truncated record header at entry " + std::to_string(i));
    }
    Mat m(rows, cols);
    for (long k = 0; k < rows * cols; ++k) {
      std::string tok;
      if (!(in >> tok)) {
        throw CheckpointError("checkpoint: truncated values in entry '" + key + "'");
      }
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw CheckpointError("checkpoint: malformed value in entry '" + key + "'");
      }
      m.data()[k] = v;
    }
    ckpt.put(key, std::move(m));
  }
  if (!(in >> word) || word != "end") throw CheckpointError("checkpoint: missing end marker");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
  out << serialize_checkpoint(ckpt);
  if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

void put_mlp(Checkpoint& ckpt, const std::string& prefix, const Mlp& net) {
  const MlpShape& s = net.shape();
  Mat shape(1, 4);
  shape << s.in, s.hidden1, s.hidden2, s.out;
  ckpt.put(prefix + ".shape", shape);
  ckpt.put_vec(prefix + ".params", net.params());
}

Mlp get_mlp(const Checkpoint& ckpt, const std::string& prefix) {
  const Mat& shape = ckpt.get(prefix + ".shape");
  if (shape.size() != 4) throw CheckpointError("checkpoint: bad shape record for " + prefix);
  Mlp net({static_cast<int>(shape(0, 0)), static_cast<int>(shape(0, 1)),
           static_cast<int>(shape(0, 2)), static_cast<int>(shape(0, 3))});
  Vec params = ckpt.get_vec(prefix + ".params");
  if (params.size() != net.params().size()) {
    throw CheckpointError("checkpoint: parameter count mismatch for " + prefix);
  }
  net.params() = params;
  return net;
}

void put_policy(Checkpoint& ckpt, const std::string& prefix, const GaussianPolicy& policy) {
  put_mlp(ckpt, prefix + ".mean_net", policy.mean_net());
  ckpt.put_vec(prefix + ".log_std", policy.log_std());
}

GaussianPolicy get_policy(const Checkpoint& ckpt, const std::string& prefix) {
  return GaussianPolicy(get_mlp(ckpt, prefix + ".mean_net"), ckpt.get_vec(prefix + ".log_std"));
}

}  // namespace divmin
