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

#include "divmin/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace divmin {

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error(
          (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
          (key.empty() ? std::string() : "'" + key + "': ") + message),
      line_(line),
      key_(std::move(key)) {}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  return out;
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

Field dbl(std::function<double&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig& c, const std::string& v) { ref(c) = to_double(v); },
          [ref](const ExperimentConfig& c) {
            return fmt_double(ref(const_cast<ExperimentConfig&>(c)));
          }};
}

template <typename I>
Field integer(std::function<I&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig& c, const std::string& v) {
            const long long x = to_int(v);
            if (x < 0) throw std::invalid_argument("must be non-negative");
            ref(c) = static_cast<I>(x);
          },
          [ref](const ExperimentConfig& c) {
            return std::to_string(ref(const_cast<ExperimentConfig&>(c)));
          }};
}

#define DBL(expr) dbl([](ExperimentConfig& c) -> double& { return expr; })
#define INT(expr) integer<int>([](ExperimentConfig& c) -> int& { return expr; })

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["algorithm"] = {[](ExperimentConfig& c, const std::string& v) { c.algorithm = parse_algorithm(v); },
                      [](const ExperimentConfig& c) { return to_string(c.algorithm); }};
    t["seed"] = integer<std::uint64_t>([](ExperimentConfig& c) -> std::uint64_t& { return c.seed; });
    t["output"] = {[](ExperimentConfig& c, const std::string& v) {
                     if (v.empty()) throw std::invalid_argument("must not be empty");
                     c.output = v;
                   },
                   [](const ExperimentConfig& c) { return c.output; }};
    t["env"] = {[](ExperimentConfig& c, const std::string& v) {
                  if (v == "maze") c.env.kind = EnvKind::kMaze;
                  else if (v == "bandit") c.env.kind = EnvKind::kBandit;
                  else if (v == "chain") c.env.kind = EnvKind::kChain;
                  else throw std::invalid_argument("expected maze, bandit or chain");
                },
                [](const ExperimentConfig& c) {
                  switch (c.env.kind) {
                    case EnvKind::kMaze: return std::string("maze");
                    case EnvKind::kBandit: return std::string("bandit");
                    case EnvKind::kChain: break;
                  }
                  return std::string("chain");
                }};
    t["reward"] = {[](ExperimentConfig& c, const std::string& v) {
                     if (v == "dense") c.env.reward_mode = RewardMode::kDense;
                     else if (v == "episodic") c.env.reward_mode = RewardMode::kEpisodic;
                     else if (v == "noisy") c.env.reward_mode = RewardMode::kNoisy;
                     else throw std::invalid_argument("expected dense, episodic or noisy");
                   },
                   [](const ExperimentConfig& c) {
                     switch (c.env.reward_mode) {
                       case RewardMode::kEpisodic: return std::string("episodic");
                       case RewardMode::kNoisy: return std::string("noisy");
                       case RewardMode::kDense: break;
                     }
                     return std::string("dense");
                   }};
    t["p_m"] = DBL(c.env.p_m);
    t["eval_episodes"] = INT(c.eval_episodes);
    t["heatmap_resolution"] = INT(c.heatmap_resolution);

    t["ppo.gamma"] = DBL(c.ensemble.ppo.gamma);
    t["ppo.lambda"] = DBL(c.ensemble.ppo.lambda);
    t["ppo.clip"] = DBL(c.ensemble.ppo.clip);
    t["ppo.epochs"] = INT(c.ensemble.ppo.epochs);
    t["ppo.minibatch"] = INT(c.ensemble.ppo.minibatch);
    t["ppo.lr"] = DBL(c.ensemble.ppo.lr);
    t["ppo.value_lr"] = DBL(c.ensemble.ppo.value_lr);
    t["ppo.nu"] = DBL(c.ensemble.ppo.nu);
    t["ppo.iterations"] = INT(c.ensemble.ppo.iterations);
    t["ppo.batch_episodes"] = INT(c.ensemble.ppo.batch_episodes);
    t["ppo.capacity"] = integer<std::size_t>([](ExperimentConfig& c) -> std::size_t& { return c.ensemble.ppo.capacity; });
    t["ppo.hidden"] = INT(c.ensemble.ppo.hidden);
    t["ppo.init_log_std"] = DBL(c.ensemble.ppo.init_log_std);
    t["disc.hidden"] = INT(c.ensemble.ppo.disc.hidden);
    t["disc.lr"] = DBL(c.ensemble.ppo.disc.lr);
    t["disc.minibatch"] = INT(c.ensemble.ppo.disc.minibatch);
    t["disc.epochs"] = INT(c.ensemble.ppo.disc.epochs);

    t["ensemble.agents"] = INT(c.ensemble.agents);
    t["ensemble.temperature"] = DBL(c.ensemble.temperature);
    t["ensemble.alpha0"] = DBL(c.ensemble.alpha0);
    t["ensemble.alpha_decay_end"] = DBL(c.ensemble.alpha_decay_end);
    t["ensemble.workers"] = INT(c.ensemble.workers);
    t["density.hidden"] = INT(c.ensemble.density.hidden);
    t["density.lr"] = DBL(c.ensemble.density.lr);
    t["density.epochs"] = INT(c.ensemble.density.epochs);
    t["density.minibatch"] = INT(c.ensemble.density.minibatch);

    t["cem.population"] = INT(c.cem.population);
    t["cem.elite_frac"] = DBL(c.cem.elite_frac);
    t["cem.iterations"] = INT(c.cem.iterations);
    t["cem.init_std"] = DBL(c.cem.init_std);
    t["cem.episodes"] = INT(c.cem_episodes);

    t["chain.goal_distance"] = DBL(c.env.chain.goal_distance);
    t["chain.goal_reward"] = DBL(c.env.chain.goal_reward);
    t["chain.energy_cost"] = DBL(c.env.chain.energy_cost);
    t["chain.step_scale"] = DBL(c.env.chain.step_scale);
    t["chain.momentum"] = DBL(c.env.chain.momentum);
    t["chain.horizon"] = INT(c.env.chain.horizon);

    t["bandit.p"] = DBL(c.env.bandit.p);
    t["bandit.epsilon"] = DBL(c.env.bandit.epsilon);

    t["maze.wall_x"] = DBL(c.env.maze.wall_x);
    t["maze.wall_top"] = DBL(c.env.maze.wall_top);
    t["maze.start_x"] = DBL(c.env.maze.start_x);
    t["maze.start_y"] = DBL(c.env.maze.start_y);
    t["maze.start_sigma"] = DBL(c.env.maze.start_sigma);
    t["maze.red_x"] = DBL(c.env.maze.red_x);
    t["maze.red_y"] = DBL(c.env.maze.red_y);
    t["maze.red_radius"] = DBL(c.env.maze.red_radius);
    t["maze.red_reward"] = DBL(c.env.maze.red_reward);
    t["maze.green_x"] = DBL(c.env.maze.green_x);
    t["maze.green_y"] = DBL(c.env.maze.green_y);
    t["maze.green_radius"] = DBL(c.env.maze.green_radius);
    t["maze.green_reward"] = DBL(c.env.maze.green_reward);
    t["maze.max_speed"] = DBL(c.env.maze.max_speed);
    t["maze.motion_sigma"] = DBL(c.env.maze.motion_sigma);
    t["maze.horizon"] = INT(c.env.maze.horizon);
    return t;
  }();
  return table;
}

#undef DBL
#undef INT

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPPO: return "ppo";
    case Algorithm::kSI: return "si";
    case Algorithm::kInteractJS: return "si-interact-js";
    case Algorithm::kInteractRBF: return "si-interact-rbf";
    case Algorithm::kIndependent: return "si-independent";
    case Algorithm::kCEM: return "cem";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kPPO, Algorithm::kSI, Algorithm::kInteractJS,
                      Algorithm::kInteractRBF, Algorithm::kIndependent, Algorithm::kCEM}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument(
      "expected one of ppo, si, si-interact-js, si-interact-rbf, si-independent, cem");
}

bool ExperimentConfig::is_ensemble() const {
  return algorithm == Algorithm::kInteractJS || algorithm == Algorithm::kInteractRBF ||
         algorithm == Algorithm::kIndependent;
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const char* key, const char* msg) {
    if (!ok) throw ConfigError(0, key, msg);
  };
  check(env.p_m >= 0.0 && env.p_m <= 1.0, "p_m", "must lie in [0, 1]");
  check(eval_episodes >= 1, "eval_episodes", "must be positive");
  check(heatmap_resolution >= 1, "heatmap_resolution", "must be positive");
  check(env.bandit.p >= 0.0 && env.bandit.epsilon >= 0.0 && env.bandit.p + env.bandit.epsilon <= 1.0,
        "bandit.p", "need 0 <= p <= p + epsilon <= 1");
  check(env.chain.horizon >= 1 && env.maze.horizon >= 1, "chain.horizon", "horizons must be positive");
  check(env.chain.momentum >= 0.0 && env.chain.momentum < 1.0, "chain.momentum", "must lie in [0, 1)");
  check(env.chain.step_scale > 0.0, "chain.step_scale", "must be positive");
  check(env.chain.goal_distance > 0.0, "chain.goal_distance", "must be positive");
  try {
    ensemble.ppo.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(0, "ppo", e.what());
  }
  if (is_ensemble()) {
    check(ensemble.agents >= 1, "ensemble.agents", "must be positive");
    try {
      ensemble.validate();
    } catch (const ContractViolation& e) {
      throw ConfigError(0, "ensemble", e.what());
    }
  }
  if (algorithm == Algorithm::kCEM) {
    check(cem.population >= 4, "cem.population", "must be at least 4");
    check(cem.elite_frac > 0.0 && cem.elite_frac <= 1.0, "cem.elite_frac", "must lie in (0, 1]");
    check(cem.iterations >= 1, "cem.iterations", "must be positive");
    check(cem.init_std > 0.0, "cem.init_std", "must be positive");
    check(cem_episodes >= 1, "cem.episodes", "must be positive");
  }
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      int line) {
  const auto& t = fields();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError(line, key, "unknown key");
  try {
    it->second.set(cfg, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, key, e.what());
  }
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  const auto& t = fields();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError(0, key, "unknown key");
  return it->second.get(cfg);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, v] : fields()) out.push_back(k);
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_version = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "", "missing key");
    if (key == "version") {
      long long v = 0;
      try {
        v = to_int(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line, key, e.what());
      }
      if (v != kConfigVersion) {
        throw ConfigError(line, key, "unsupported config version " + value + " (expected " +
                                         std::to_string(kConfigVersion) + ")");
      }
      have_version = true;
      continue;
    }
    set_config_value(cfg, key, value, line);
  }
  if (!have_version) throw ConfigError(0, "version", "missing version key");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "version = " << kConfigVersion << "\n";
  for (const auto& [k, f] : fields()) out << k << " = " << f.get(cfg) << "\n";
  return out.str();
}

}  // namespace divmin
