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

// Experiment driver: runs one configured algorithm into an output directory,
// sweeps one config axis over seeds, and rebuilds exports from run artifacts.
//
// A run directory holds
//   config.txt        resolved configuration
//   metrics.jsonl     one record per iteration, deterministic given the config
//   timing.jsonl      wall-clock per iteration (kept apart so metrics stay
//                     byte-reproducible)
//   result.json       final scores and the post-training evaluation
//   checkpoint.divmin final parameters
//   heatmap.csv       maze only; plus heatmap_agent_<i>.csv for ensembles
//   kernel_###.csv    ensembles only, one per iteration
//   ERROR             written when the run aborts

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "divmin/checkpoint.hpp"
#include "divmin/config.hpp"

namespace divmin {

inline constexpr const char* kOutputRootEnv = "DIVMIN_OUTPUT_ROOT";

/// DIVMIN_OUTPUT_ROOT when set, the working directory otherwise.
std::filesystem::path output_root();
/// cfg.output resolved against output_root() unless it is absolute.
std::filesystem::path resolve_output(const ExperimentConfig& cfg);

struct AgentSummary {
  double final_score = 0.0;
  double eval_return = 0.0;
  double eval_success_rate = 0.0;
  /// Fraction of evaluation steps spent in the goal region.
  double eval_goal_fraction = 0.0;
};

struct RunSummary {
  std::filesystem::path dir;
  int iterations = 0;
  /// Final-window score; for ensembles the best agent's.
  double final_score = 0.0;
  int best_agent = 0;
  std::vector<AgentSummary> agents;
  /// Mean off-diagonal kernel entry of the last iteration (ensembles), else 1.
  double final_kernel_offdiag_mean = 1.0;
};

/// Called after every iteration with (iteration, total, mean return).
using ProgressFn = std::function<void(int, int, double)>;

/// Runs cfg into dir (created if needed). On an exception an ERROR file with
/// the message is left next to the partial artifacts and the exception is
/// rethrown.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                          const ProgressFn& progress = {});

/// One sweep axis. Short names nu, C and p_m map to ppo.nu, ppo.capacity and
/// p_m; any other config key is accepted as is.
struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses "name=v1,v2,...".
SweepAxis parse_axis(const std::string& spec);
std::vector<std::uint64_t> parse_seeds(const std::string& spec);

struct SweepCell {
  std::string value;
  std::uint64_t seed = 0;
  bool ok = false;
  double final_score = 0.0;
  std::string error;
  std::filesystem::path dir;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::filesystem::path summary_csv;
};

/// Runs every (value, seed) cell into dir/<key>=<value>/seed_<s>. Failed cells
/// are recorded and the sweep continues. Writes cells.csv and summary.csv
/// (mean and sample std of the final score per value over successful seeds).
SweepResult run_sweep(const ExperimentConfig& base, const SweepAxis& axis,
                      const std::vector<std::uint64_t>& seeds, const std::filesystem::path& dir,
                      int jobs = 1);

struct CheckpointEval {
  /// One entry per policy in the checkpoint.
  std::vector<EvalResult> agents;
  Mat heatmap;  // visitation over all agents (maze), empty otherwise
};

/// Loads dir/config.txt and dir/checkpoint.divmin (or the checkpoint at path
/// with a sibling config.txt) and evaluates every stored policy.
CheckpointEval evaluate_checkpoint(const std::filesystem::path& checkpoint, int episodes);

/// Re-evaluates the run's checkpoint and rewrites its heatmap CSVs.
std::filesystem::path export_heatmap(const std::filesystem::path& run_dir, int episodes);
/// Rewrites kernel_###.csv from the kernels recorded in metrics.jsonl.
int export_kernel(const std::filesystem::path& run_dir);

void write_matrix_csv(const Mat& m, const std::filesystem::path& path);
std::string kernel_file_name(int iteration);

}  // namespace divmin
