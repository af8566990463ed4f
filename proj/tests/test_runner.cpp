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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "divmin/runner.hpp"
#include "json.hpp"

namespace divmin {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string s; std::getline(in, s);) out.push_back(s);
  return out;
}

class RunnerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("divmin_runner_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  static ExperimentConfig chain_ppo(int iterations) {
    ExperimentConfig c;
    set_config_value(c, "algorithm", "ppo");
    set_config_value(c, "env", "chain");
    set_config_value(c, "ppo.iterations", std::to_string(iterations));
    set_config_value(c, "ppo.batch_episodes", "2");
    set_config_value(c, "ppo.hidden", "8");
    set_config_value(c, "chain.horizon", "30");
    set_config_value(c, "eval_episodes", "3");
    return c;
  }

  static ExperimentConfig maze_ensemble(const std::string& algo, int agents, int iterations) {
    ExperimentConfig c;
    set_config_value(c, "algorithm", algo);
    set_config_value(c, "env", "maze");
    set_config_value(c, "ensemble.agents", std::to_string(agents));
    set_config_value(c, "ppo.iterations", std::to_string(iterations));
    set_config_value(c, "ppo.batch_episodes", "1");
    set_config_value(c, "ppo.hidden", "8");
    set_config_value(c, "ppo.epochs", "1");
    set_config_value(c, "disc.hidden", "8");
    set_config_value(c, "density.hidden", "8");
    set_config_value(c, "density.epochs", "1");
    set_config_value(c, "maze.horizon", "20");
    set_config_value(c, "eval_episodes", "2");
    set_config_value(c, "heatmap_resolution", "5");
    return c;
  }

  fs::path root_;
};

TEST_F(RunnerTest, PpoTenIterationsTenRecords) {
  const RunSummary s = run_experiment(chain_ppo(10), root_ / "run");
  const auto rec = lines(root_ / "run" / "metrics.jsonl");
  ASSERT_EQ(rec.size(), 10u);
  EXPECT_EQ(s.iterations, 10);
  // Fixed key set on every record.
  const auto first = nlohmann::json::parse(rec.front());
  for (const auto& line : rec) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.size(), first.size());
    for (const auto& [k, v] : first.items()) EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(first["iteration"], 1);
  EXPECT_TRUE(fs::exists(root_ / "run" / "checkpoint.divmin"));
  EXPECT_TRUE(fs::exists(root_ / "run" / "config.txt"));
  EXPECT_TRUE(fs::exists(root_ / "run" / "result.json"));
  EXPECT_EQ(lines(root_ / "run" / "timing.jsonl").size(), 10u);
  EXPECT_FALSE(fs::exists(root_ / "run" / "ERROR"));
}

TEST_F(RunnerTest, SameSeedByteIdenticalMetrics) {
  ExperimentConfig c = chain_ppo(5);
  set_config_value(c, "algorithm", "si");
  run_experiment(c, root_ / "a");
  run_experiment(c, root_ / "b");
  EXPECT_EQ(slurp(root_ / "a" / "metrics.jsonl"), slurp(root_ / "b" / "metrics.jsonl"));
  EXPECT_EQ(slurp(root_ / "a" / "checkpoint.divmin"), slurp(root_ / "b" / "checkpoint.divmin"));
  // Re-running into the same directory replaces the artifacts.
  run_experiment(c, root_ / "a");
  EXPECT_EQ(slurp(root_ / "a" / "metrics.jsonl"), slurp(root_ / "b" / "metrics.jsonl"));
}

TEST_F(RunnerTest, InteractEightAgentKernelsAreEightByEight) {
  const RunSummary s = run_experiment(maze_ensemble("si-interact-js", 8, 2), root_ / "ens");
  for (int it = 1; it <= 2; ++it) {
    const auto rows = lines(root_ / "ens" / kernel_file_name(it));
    ASSERT_EQ(rows.size(), 8u) << it;
    for (std::size_t i = 0; i < 8; ++i) {
      std::stringstream ss(rows[i]);
      std::vector<double> vals;
      for (std::string cell; std::getline(ss, cell, ',');) vals.push_back(std::stod(cell));
      ASSERT_EQ(vals.size(), 8u);
      EXPECT_EQ(vals[i], 1.0);
    }
  }
  EXPECT_EQ(kernel_file_name(1), "kernel_001.csv");
  EXPECT_TRUE(fs::exists(root_ / "ens" / "heatmap.csv"));
  EXPECT_TRUE(fs::exists(root_ / "ens" / "heatmap_agent_7.csv"));
  EXPECT_EQ(s.agents.size(), 8u);
  EXPECT_GE(s.best_agent, 0);
  EXPECT_LT(s.best_agent, 8);

  // export-kernel rebuilds the same files from metrics.jsonl.
  const std::string before = slurp(root_ / "ens" / kernel_file_name(2));
  fs::remove(root_ / "ens" / kernel_file_name(2));
  EXPECT_EQ(export_kernel(root_ / "ens"), 2);
  EXPECT_EQ(slurp(root_ / "ens" / kernel_file_name(2)), before);

  const fs::path heat = export_heatmap(root_ / "ens", 2);
  EXPECT_EQ(lines(heat).size(), 5u);
}

TEST_F(RunnerTest, EvaluateCheckpointPerAgent) {
  run_experiment(maze_ensemble("si-independent", 3, 1), root_ / "ind");
  const CheckpointEval ev = evaluate_checkpoint(root_ / "ind", 2);
  EXPECT_EQ(ev.agents.size(), 3u);
  EXPECT_EQ(ev.heatmap.rows(), 5);
  EXPECT_NEAR(ev.heatmap.sum(), 1.0, 1e-12);
  run_experiment(chain_ppo(2), root_ / "one");
  const CheckpointEval one = evaluate_checkpoint(root_ / "one" / "checkpoint.divmin", 4);
  ASSERT_EQ(one.agents.size(), 1u);
  EXPECT_EQ(one.agents[0].trajectories.size(), 4u);
  EXPECT_THROW(evaluate_checkpoint(root_ / "missing", 1), IoError);
}

TEST_F(RunnerTest, CemRunWritesRecords) {
  ExperimentConfig c = chain_ppo(1);
  set_config_value(c, "algorithm", "cem");
  set_config_value(c, "cem.population", "6");
  set_config_value(c, "cem.iterations", "3");
  run_experiment(c, root_ / "cem");
  EXPECT_EQ(lines(root_ / "cem" / "metrics.jsonl").size(), 3u);
  EXPECT_TRUE(fs::exists(root_ / "cem" / "checkpoint.divmin"));
}

TEST_F(RunnerTest, MidRunFailureLeavesErrorMarker) {
  auto explode = [](int it, int, double) {
    if (it == 3) throw std::runtime_error("boom at 3");
  };
  EXPECT_THROW(run_experiment(chain_ppo(6), root_ / "bad", explode), std::runtime_error);
  EXPECT_NE(slurp(root_ / "bad" / "ERROR").find("boom at 3"), std::string::npos);
  EXPECT_EQ(lines(root_ / "bad" / "metrics.jsonl").size(), 3u);
  // A clean rerun clears the marker.
  run_experiment(chain_ppo(2), root_ / "bad");
  EXPECT_FALSE(fs::exists(root_ / "bad" / "ERROR"));
}

TEST_F(RunnerTest, InvalidConfigRejectedBeforeRunning) {
  ExperimentConfig c = chain_ppo(2);
  set_config_value(c, "ppo.nu", "3");
  EXPECT_THROW(run_experiment(c, root_ / "x"), ConfigError);
  EXPECT_FALSE(fs::exists(root_ / "x" / "metrics.jsonl"));
}

TEST_F(RunnerTest, SweepCellCountSurvivesFailures) {
  ExperimentConfig c = chain_ppo(2);
  const SweepAxis axis = parse_axis("nu=0,0.5,7");
  const SweepResult r = run_sweep(c, axis, {0, 1}, root_ / "sweep", 2);
  ASSERT_EQ(r.cells.size(), 6u);
  int failed = 0;
  for (const auto& cell : r.cells) {
    if (!cell.ok) {
      ++failed;
      EXPECT_EQ(cell.value, "7");
      EXPECT_FALSE(cell.error.empty());
    } else {
      EXPECT_TRUE(std::isfinite(cell.final_score));
    }
  }
  EXPECT_EQ(failed, 2);
  const auto rows = lines(r.summary_csv);
  EXPECT_EQ(rows.size(), 4u);  // header + one row per value
  EXPECT_EQ(lines(root_ / "sweep" / "cells.csv").size(), 7u);
}

TEST_F(RunnerTest, DegenerateSweepEqualsRun) {
  ExperimentConfig c = chain_ppo(3);
  set_config_value(c, "algorithm", "si");
  set_config_value(c, "seed", "4");
  const RunSummary direct = run_experiment(c, root_ / "direct");
  const SweepResult r = run_sweep(c, parse_axis("nu=0.8"), {4}, root_ / "sweep");
  ASSERT_EQ(r.cells.size(), 1u);
  ASSERT_TRUE(r.cells[0].ok) << r.cells[0].error;
  EXPECT_EQ(r.cells[0].final_score, direct.final_score);
  EXPECT_EQ(slurp(r.cells[0].dir / "metrics.jsonl"), slurp(root_ / "direct" / "metrics.jsonl"));
}

TEST_F(RunnerTest, CapacityAxisRunsFinite) {
  ExperimentConfig c = chain_ppo(2);
  set_config_value(c, "algorithm", "si");
  const SweepResult r = run_sweep(c, parse_axis("C=1,10,50"), {0}, root_ / "cap");
  ASSERT_EQ(r.cells.size(), 3u);
  for (const auto& cell : r.cells) {
    EXPECT_TRUE(cell.ok) << cell.error;
    EXPECT_TRUE(std::isfinite(cell.final_score));
  }
}

TEST_F(RunnerTest, OutputRootFromEnvironment) {
  ExperimentConfig c;
  c.output = "rel/run";
  ::setenv(kOutputRootEnv, root_.c_str(), 1);
  EXPECT_EQ(resolve_output(c), root_ / "rel/run");
  c.output = "/abs/run";
  EXPECT_EQ(resolve_output(c), fs::path("/abs/run"));
  ::unsetenv(kOutputRootEnv);
  c.output = "rel";
  EXPECT_EQ(resolve_output(c), fs::current_path() / "rel");
}

TEST(SweepParsing, AxisAndSeeds) {
  const SweepAxis a = parse_axis("nu=0,0.2");
  EXPECT_EQ(a.key, "ppo.nu");
  EXPECT_EQ(a.values, (std::vector<std::string>{"0", "0.2"}));
  EXPECT_EQ(parse_axis("C=1").key, "ppo.capacity");
  EXPECT_EQ(parse_axis("p_m=0.5").key, "p_m");
  EXPECT_THROW(parse_axis("nu"), ConfigError);
  EXPECT_THROW(parse_axis("nope=1"), ConfigError);
  EXPECT_EQ(parse_seeds("0-3"), (std::vector<std::uint64_t>{0, 1, 2, 3}));
  EXPECT_EQ(parse_seeds("5,2"), (std::vector<std::uint64_t>{5, 2}));
  EXPECT_THROW(parse_seeds("x"), ConfigError);
}

}  // namespace
}  // namespace divmin
