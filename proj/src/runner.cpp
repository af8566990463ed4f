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

#include "divmin/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace divmin {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kConfigFile = "config.txt";
constexpr const char* kCheckpointFile = "checkpoint.divmin";

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json stats_json(const IterationStats& s) {
  return json{{"iteration", s.iteration},
              {"env_return_mean", s.return_mean},
              {"env_return_std", s.return_std},
              {"observed_return_mean", s.observed_return_mean},
              {"success_rate", s.success_rate},
              {"goal_fraction", s.goal_fraction},
              {"js_estimate", finite_or_null(s.js_estimate)},
              {"shaped_reward_mean", s.shaped_reward_mean},
              {"replay_threshold", finite_or_null(s.replay_threshold)},
              {"replay_size", s.replay_size},
              {"log_std_mean", s.log_std_mean},
              {"rejected_steps", s.rejected_steps}};
}

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = n ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Mat out(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != m)
      throw std::runtime_error("ragged matrix in metrics");
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = rows[r][c].get<double>();
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

/// Line-buffered JSONL sink: each record is flushed so a crash leaves every
/// completed iteration on disk.
class JsonlWriter {
 public:
  explicit JsonlWriter(const fs::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
  }
  void write(const json& record) {
    out_ << record.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void clear_artifacts(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const bool generated = name == "ERROR" || name == "metrics.jsonl" || name == "timing.jsonl" ||
                           name == "result.json" || name == kCheckpointFile ||
                           name.rfind("kernel_", 0) == 0 || name.rfind("heatmap", 0) == 0;
    if (generated && entry.is_regular_file()) fs::remove(entry.path());
  }
}

std::unique_ptr<Env> build_env(const ExperimentConfig& cfg, std::uint64_t seed) {
  return make_env(cfg.env, stream_seed(seed, SeedStream::kNoiseMask));
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

void put_agent(Checkpoint& ckpt, const std::string& prefix, const SelfImitationAgent& agent) {
  put_policy(ckpt, prefix + "policy", agent.policy());
  put_mlp(ckpt, prefix + "values.env", agent.values().env);
  put_mlp(ckpt, prefix + "values.shaped", agent.values().shaped);
  if (const Discriminator* d = agent.discriminator()) put_mlp(ckpt, prefix + "disc", d->net());
}

AgentSummary summarize(Env& env, const GaussianPolicy& policy, double final_score, int episodes,
                       std::uint64_t seed, std::vector<Trajectory>* trajectories) {
  Rng rng(stream_seed(seed, SeedStream::kEval));
  EvalResult ev = evaluate_policy(env, policy, episodes, rng);
  AgentSummary s;
  s.final_score = final_score;
  s.eval_return = ev.mean_return;
  s.eval_success_rate = ev.success_rate;
  s.eval_goal_fraction = ev.goal_fraction;
  if (trajectories) {
    for (auto& t : ev.trajectories) trajectories->push_back(std::move(t));
  }
  return s;
}

json summary_json(const ExperimentConfig& cfg, const RunSummary& s) {
  json agents = json::array();
  for (const auto& a : s.agents) {
    agents.push_back({{"final_score", a.final_score},
                      {"eval_return", a.eval_return},
                      {"eval_success_rate", a.eval_success_rate},
                      {"eval_goal_fraction", a.eval_goal_fraction}});
  }
  return json{{"algorithm", to_string(cfg.algorithm)},
              {"seed", cfg.seed},
              {"iterations", s.iterations},
              {"final_score", s.final_score},
              {"best_agent", s.best_agent},
              {"final_kernel_offdiag_mean", s.final_kernel_offdiag_mean},
              {"agents", agents}};
}

RunSummary run_single(const ExperimentConfig& cfg, const fs::path& dir, JsonlWriter& metrics,
                      JsonlWriter& timing, const ProgressFn& progress) {
  const bool si = cfg.algorithm == Algorithm::kSI;
  auto env = build_env(cfg, cfg.seed);
  const int total = cfg.ppo().iterations;
  auto t0 = std::chrono::steady_clock::now();
  TrainResult res = train_self_imitation(*env, cfg.ppo(), cfg.seed, si, [&](const IterationStats& st) {
    metrics.write(stats_json(st));
    timing.write({{"iteration", st.iteration}, {"wall_ms", elapsed_ms(t0)}});
    t0 = std::chrono::steady_clock::now();
    if (progress) progress(st.iteration, total, st.return_mean);
  });
  const SelfImitationAgent& agent = *res.agent;
  const std::vector<IterationStats>& history = res.history;

  Checkpoint ckpt;
  put_agent(ckpt, "", agent);
  save_checkpoint(ckpt, dir / kCheckpointFile);

  RunSummary s;
  s.iterations = total;
  s.final_score = final_window_score(history);
  std::vector<Trajectory> trajs;
  s.agents.push_back(summarize(*env, agent.policy(), s.final_score, cfg.eval_episodes, cfg.seed,
                               &trajs));
  if (cfg.env.kind == EnvKind::kMaze)
    write_matrix_csv(visitation_histogram(trajs, cfg.heatmap_resolution), dir / "heatmap.csv");
  return s;
}

RunSummary run_ensemble(const ExperimentConfig& cfg, const fs::path& dir, JsonlWriter& metrics,
                        JsonlWriter& timing, const ProgressFn& progress) {
  EnsembleConfig ecfg = cfg.ensemble;
  if (cfg.algorithm == Algorithm::kInteractJS) ecfg.mode = EnsembleMode::kInteractJS;
  if (cfg.algorithm == Algorithm::kInteractRBF) ecfg.mode = EnsembleMode::kInteractRBF;
  if (cfg.algorithm == Algorithm::kIndependent) ecfg.mode = EnsembleMode::kIndependent;
  const int total = ecfg.ppo.iterations;

  auto last = std::chrono::steady_clock::now();
  double final_offdiag = 1.0;
  EnsembleObserver observer = [&](const EnsembleIteration& r) {
    const int it = r.agents.empty() ? 0 : r.agents.front().iteration;
    json agents = json::array();
    double mean = 0.0;
    for (const auto& a : r.agents) {
      agents.push_back(stats_json(a));
      mean += a.return_mean;
    }
    mean /= static_cast<double>(std::max<std::size_t>(1, r.agents.size()));
    metrics.write({{"iteration", it},
                   {"env_return_mean", mean},
                   {"alpha", r.alpha},
                   {"kernel_offdiag_mean", r.kernel_offdiag_mean},
                   {"kernel_offdiag_min", r.kernel_offdiag_min},
                   {"zeroed_agents", r.zeroed_agents},
                   {"kernel", matrix_json(r.kernel)},
                   {"applied_kernel", matrix_json(r.applied_kernel)},
                   {"agents", agents}});
    write_matrix_csv(r.kernel, dir / kernel_file_name(it));
    timing.write({{"iteration", it}, {"wall_ms", elapsed_ms(last)}});
    last = std::chrono::steady_clock::now();
    final_offdiag = r.kernel_offdiag_mean;
    if (progress) progress(it, total, mean);
  };
  EnvFactory factory = [&cfg](std::uint64_t s) { return build_env(cfg, s); };
  EnsembleResult res = train_ensemble(factory, ecfg, cfg.seed, observer);

  const int n = static_cast<int>(res.agents.size());
  Checkpoint ckpt;
  Mat meta(1, 1);
  meta(0, 0) = n;
  ckpt.put("meta.agents", meta);
  for (int i = 0; i < n; ++i) {
    put_agent(ckpt, "agent." + std::to_string(i) + ".", *res.agents[static_cast<std::size_t>(i)]);
    put_mlp(ckpt, "density." + std::to_string(i),
            res.density_models[static_cast<std::size_t>(i)].net());
  }
  save_checkpoint(ckpt, dir / kCheckpointFile);

  RunSummary s;
  s.iterations = total;
  s.final_kernel_offdiag_mean = final_offdiag;
  std::vector<Trajectory> all;
  for (int i = 0; i < n; ++i) {
    std::vector<IterationStats> hist;
    for (const auto& h : res.history) hist.push_back(h.agents[static_cast<std::size_t>(i)]);
    std::vector<Trajectory> mine;
    auto env = build_env(cfg, agent_seed(cfg.seed, i));
    s.agents.push_back(summarize(*env, res.agents[static_cast<std::size_t>(i)]->policy(),
                                 final_window_score(hist), cfg.eval_episodes,
                                 agent_seed(cfg.seed, i), &mine));
    if (cfg.env.kind == EnvKind::kMaze) {
      write_matrix_csv(visitation_histogram(mine, cfg.heatmap_resolution),
                       dir / ("heatmap_agent_" + std::to_string(i) + ".csv"));
    }
    for (auto& t : mine) all.push_back(std::move(t));
  }
  if (cfg.env.kind == EnvKind::kMaze)
    write_matrix_csv(visitation_histogram(all, cfg.heatmap_resolution), dir / "heatmap.csv");
  // Best agent by final-window score; ties keep the lowest rank.
  for (int i = 1; i < n; ++i) {
    if (s.agents[static_cast<std::size_t>(i)].final_score >
        s.agents[static_cast<std::size_t>(s.best_agent)].final_score)
      s.best_agent = i;
  }
  s.final_score = s.agents[static_cast<std::size_t>(s.best_agent)].final_score;
  return s;
}

RunSummary run_cem(const ExperimentConfig& cfg, const fs::path& dir, JsonlWriter& metrics,
                   JsonlWriter& timing, const ProgressFn& progress) {
  auto env = build_env(cfg, cfg.seed);
  const auto t0 = std::chrono::steady_clock::now();
  CemPolicyResult res = cem_baseline(*env, cfg.cem, cfg.ppo().hidden, cfg.cem_episodes, cfg.seed);
  // The search runs as one call, so per-generation wall time is the average.
  const double per_gen = elapsed_ms(t0) / std::max<std::size_t>(1, res.search.trace.size());
  std::vector<IterationStats> history;
  for (std::size_t g = 0; g < res.search.trace.size(); ++g) {
    const CemGeneration& gen = res.search.trace[g];
    metrics.write({{"iteration", g},
                   {"env_return_mean", gen.mean},
                   {"best", gen.best},
                   {"elite_mean", gen.elite_mean},
                   {"reinflated", gen.reinflated}});
    timing.write({{"iteration", g}, {"wall_ms", per_gen}});
    IterationStats st;
    st.iteration = static_cast<int>(g);
    st.return_mean = gen.elite_mean;
    history.push_back(st);
    if (progress) progress(static_cast<int>(g), cfg.cem.iterations, gen.mean);
  }

  Checkpoint ckpt;
  put_policy(ckpt, "policy", res.policy);
  ckpt.put_vec("cem.mean", res.search.mean);
  ckpt.put_vec("cem.variance", res.search.variance);
  save_checkpoint(ckpt, dir / kCheckpointFile);

  RunSummary s;
  s.iterations = cfg.cem.iterations;
  s.final_score = final_window_score(history);
  std::vector<Trajectory> trajs;
  s.agents.push_back(
      summarize(*env, res.policy, s.final_score, cfg.eval_episodes, cfg.seed, &trajs));
  if (cfg.env.kind == EnvKind::kMaze)
    write_matrix_csv(visitation_histogram(trajs, cfg.heatmap_resolution), dir / "heatmap.csv");
  return s;
}

std::string canonical_axis_key(const std::string& name) {
  if (name == "nu") return "ppo.nu";
  if (name == "C") return "ppo.capacity";
  return name;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-')
                              ? c
                              : '_';
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

struct LoadedRun {
  ExperimentConfig cfg;
  Checkpoint ckpt;
};

LoadedRun load_run(const fs::path& checkpoint_or_dir) {
  fs::path ckpt_path = checkpoint_or_dir;
  if (fs::is_directory(ckpt_path)) ckpt_path /= kCheckpointFile;
  const fs::path cfg_path = ckpt_path.parent_path() / kConfigFile;
  if (!fs::exists(cfg_path))
    throw IoError("no " + std::string(kConfigFile) + " next to " + ckpt_path.string());
  return {load_config(cfg_path), load_checkpoint(ckpt_path)};
}

}  // namespace

fs::path output_root() {
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root);
  return fs::current_path();
}

fs::path resolve_output(const ExperimentConfig& cfg) {
  const fs::path out(cfg.output);
  return out.is_absolute() ? out : output_root() / out;
}

std::string kernel_file_name(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "kernel_%03d.csv", iteration);
  return buf;
}

void write_matrix_csv(const Mat& m, const fs::path& path) {
  std::string text;
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) text += ',';
      text += buf;
    }
    text += '\n';
  }
  write_text(path, text);
}

RunSummary run_experiment(const ExperimentConfig& cfg, const fs::path& dir,
                          const ProgressFn& progress) {
  cfg.validate();
  fs::create_directories(dir);
  clear_artifacts(dir);
  try {
    write_text(dir / kConfigFile, format_config(cfg));
    JsonlWriter metrics(dir / "metrics.jsonl");
    JsonlWriter timing(dir / "timing.jsonl");
    RunSummary s;
    if (cfg.algorithm == Algorithm::kCEM) {
      s = run_cem(cfg, dir, metrics, timing, progress);
    } else if (cfg.is_ensemble()) {
      s = run_ensemble(cfg, dir, metrics, timing, progress);
    } else {
      s = run_single(cfg, dir, metrics, timing, progress);
    }
    s.dir = dir;
    write_text(dir / "result.json", summary_json(cfg, s).dump(2) + "\n");
    return s;
  } catch (const std::exception& e) {
    std::ofstream(dir / "ERROR") << e.what() << '\n';
    throw;
  }
}

SweepAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw ConfigError(0, spec, "axis must look like name=v1,v2,...");
  SweepAxis axis;
  axis.key = canonical_axis_key(spec.substr(0, eq));
  for (const auto& v : split(spec.substr(eq + 1), ',')) {
    if (v.empty()) throw ConfigError(0, axis.key, "empty axis value");
    axis.values.push_back(v);
  }
  // Validate every value up front against a scratch config.
  ExperimentConfig probe;
  for (const auto& v : axis.values) set_config_value(probe, axis.key, v);
  return axis;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(spec, ',')) {
    const auto dash = part.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const std::uint64_t a = std::stoull(part.substr(0, dash));
        const std::uint64_t b = std::stoull(part.substr(dash + 1));
        if (b < a) throw std::invalid_argument("range");
        for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
      } else {
        if (part.empty() || part[0] == '-') throw std::invalid_argument("seed");
        seeds.push_back(std::stoull(part));
      }
    } catch (const std::logic_error&) {
      throw ConfigError(0, "seeds", "bad seed list '" + spec + "'");
    }
  }
  if (seeds.empty()) throw ConfigError(0, "seeds", "no seeds given");
  return seeds;
}

SweepResult run_sweep(const ExperimentConfig& base, const SweepAxis& axis,
                      const std::vector<std::uint64_t>& seeds, const fs::path& dir, int jobs) {
  if (axis.values.empty() || seeds.empty())
    throw ConfigError(0, axis.key, "sweep needs at least one value and one seed");
  fs::create_directories(dir);
  SweepResult result;
  for (const auto& v : axis.values) {
    for (std::uint64_t s : seeds) {
      SweepCell c;
      c.value = v;
      c.seed = s;
      c.dir = dir / (sanitize(axis.key) + "=" + sanitize(v)) / ("seed_" + std::to_string(s));
      result.cells.push_back(std::move(c));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      SweepCell& c = result.cells[i];
      try {
        ExperimentConfig cfg = base;
        set_config_value(cfg, axis.key, c.value);
        cfg.seed = c.seed;
        cfg.output = c.dir.string();
        c.final_score = run_experiment(cfg, c.dir).final_score;
        c.ok = std::isfinite(c.final_score);
        if (!c.ok) c.error = "non-finite final score";
      } catch (const std::exception& e) {
        c.ok = false;
        c.error = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(result.cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string cells = "key,value,seed,status,final_score,error\n";
  std::string summary = "key,value,seeds,failed,mean,std\n";
  char buf[64];
  for (const auto& v : axis.values) {
    std::vector<double> scores;
    int failed = 0;
    for (const auto& c : result.cells) {
      if (c.value != v) continue;
      std::string err = c.error;
      for (char& ch : err) if (ch == ',' || ch == '\n') ch = ' ';
      std::snprintf(buf, sizeof buf, "%.17g", c.final_score);
      cells += axis.key + "," + v + "," + std::to_string(c.seed) + "," +
               (c.ok ? "ok" : "failed") + "," + (c.ok ? buf : "") + "," + err + "\n";
      if (c.ok) scores.push_back(c.final_score); else ++failed;
    }
    double mean = std::nan(""), sd = std::nan("");
    if (!scores.empty()) {
      mean = 0.0;
      for (double x : scores) mean += x;
      mean /= static_cast<double>(scores.size());
      sd = 0.0;
      for (double x : scores) sd += (x - mean) * (x - mean);
      sd = scores.size() > 1 ? std::sqrt(sd / static_cast<double>(scores.size() - 1)) : 0.0;
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", mean, sd);
    summary += axis.key + "," + v + "," + std::to_string(scores.size() + failed) + "," +
               std::to_string(failed) + "," + buf + "\n";
  }
  write_text(dir / "cells.csv", cells);
  result.summary_csv = dir / "summary.csv";
  write_text(result.summary_csv, summary);
  return result;
}

CheckpointEval evaluate_checkpoint(const fs::path& checkpoint, int episodes) {
  if (episodes < 1) throw std::invalid_argument("episodes must be positive");
  const LoadedRun run = load_run(checkpoint);
  std::vector<std::pair<std::string, std::uint64_t>> policies;
  if (run.ckpt.has("meta.agents")) {
    const int n = static_cast<int>(run.ckpt.get("meta.agents")(0, 0));
    for (int i = 0; i < n; ++i)
      policies.emplace_back("agent." + std::to_string(i) + ".policy", agent_seed(run.cfg.seed, i));
  } else {
    policies.emplace_back("policy", run.cfg.seed);
  }
  CheckpointEval out;
  std::vector<Trajectory> all;
  for (const auto& [key, seed] : policies) {
    GaussianPolicy policy = get_policy(run.ckpt, key);
    auto env = build_env(run.cfg, seed);
    if (policy.obs_dim() != env->obs_dim() || policy.act_dim() != env->act_dim())
      throw CheckpointError("checkpoint policy does not fit the configured environment");
    Rng rng(stream_seed(seed, SeedStream::kEval));
    EvalResult ev = evaluate_policy(*env, policy, episodes, rng);
    for (const auto& t : ev.trajectories) all.push_back(t);
    out.agents.push_back(std::move(ev));
  }
  if (run.cfg.env.kind == EnvKind::kMaze)
    out.heatmap = visitation_histogram(all, run.cfg.heatmap_resolution);
  return out;
}

fs::path export_heatmap(const fs::path& run_dir, int episodes) {
  const LoadedRun run = load_run(run_dir);
  if (run.cfg.env.kind != EnvKind::kMaze)
    throw std::invalid_argument("heatmaps are defined for the maze only");
  CheckpointEval ev = evaluate_checkpoint(run_dir, episodes);
  if (ev.agents.size() > 1) {
    for (std::size_t i = 0; i < ev.agents.size(); ++i) {
      write_matrix_csv(visitation_histogram(ev.agents[i].trajectories, run.cfg.heatmap_resolution),
                       run_dir / ("heatmap_agent_" + std::to_string(i) + ".csv"));
    }
  }
  const fs::path out = run_dir / "heatmap.csv";
  write_matrix_csv(ev.heatmap, out);
  return out;
}

int export_kernel(const fs::path& run_dir) {
  std::ifstream in(run_dir / "metrics.jsonl");
  if (!in) throw IoError("cannot read " + (run_dir / "metrics.jsonl").string());
  std::string line;
  int written = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("metrics.jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.contains("kernel")) continue;
    write_matrix_csv(matrix_from_json(rec["kernel"]),
                     run_dir / kernel_file_name(rec["iteration"].get<int>()));
    ++written;
  }
  if (written == 0) throw std::runtime_error("no kernel records in metrics.jsonl");
  return written;
}

}  // namespace divmin
