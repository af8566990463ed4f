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

// divmin command line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "divmin/divmin.h"

namespace {

int report(divmin_status s) {
  if (s != DIVMIN_OK)
    std::fprintf(stderr, "divmin: %s: %s\n", divmin_status_name(s), divmin_last_error());
  return static_cast<int>(s);
}

template <class H>
std::string fetch_from(divmin_status (*get)(const H*, char*, size_t, size_t*), const H* h) {
  size_t n = 0;
  if (get(h, nullptr, 0, &n) != DIVMIN_OK) return {};
  std::string s(n + 1, '\0');
  get(h, s.data(), s.size(), &n);
  s.resize(n);
  return s;
}

// Loads the config file and applies --set overrides in order.
divmin_status load_with_overrides(const std::string& path, const std::vector<std::string>& sets,
                                  divmin_config** out) {
  divmin_config* cfg = nullptr;
  if (auto s = divmin_config_load(path.c_str(), &cfg); s != DIVMIN_OK) return s;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      divmin_config_free(cfg);
      std::fprintf(stderr, "divmin: --set expects key=value, got '%s'\n", kv.c_str());
      return DIVMIN_INVALID_ARGUMENT;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (auto s = divmin_config_set(cfg, key.c_str(), value.c_str()); s != DIVMIN_OK) {
      divmin_config_free(cfg);
      return s;
    }
  }
  *out = cfg;
  return DIVMIN_OK;
}

void print_progress(int iteration, int total, double mean_return, void* user) {
  const int every = *static_cast<int*>(user);
  if (every > 0 && (iteration % every == 0 || iteration == total))
    std::fprintf(stderr, "iter %d/%d  return %.4f\n", iteration, total, mean_return);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divmin: self-imitation and diverse policy ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(divmin_version()));

  std::string config_path, output;
  std::vector<std::string> sets;
  int log_every = 10;

  auto* run = app.add_subcommand("run", "Train the configured algorithm");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override a config key (key=value), repeatable");
  run->add_option("--output", output, "Output directory, relative paths under the output root");
  run->add_option("--log-every", log_every, "Progress line interval, 0 for silent");

  std::string axis, seeds = "0";
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run a config axis over several seeds");
  sweep->add_option("config", config_path, "Base config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "name=v1,v2,... (nu, C, p_m or any config key)")->required();
  sweep->add_option("--seeds", seeds, "Seed list, e.g. 0,1,2 or 0-4");
  sweep->add_option("--jobs", jobs, "Cells run concurrently")->check(CLI::PositiveNumber);
  sweep->add_option("--set", sets, "Override a config key (key=value), repeatable");
  sweep->add_option("--output", output, "Sweep directory, relative paths under the output root");

  std::string path;
  int episodes = 20;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and print JSON");
  eval->add_option("checkpoint", path, "checkpoint.divmin or run directory")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);

  auto* heat = app.add_subcommand("export-heatmap", "Rebuild heatmap CSVs of a maze run");
  heat->add_option("run-dir", path, "Run directory")->required()->check(CLI::ExistingDirectory);
  heat->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);

  auto* kern = app.add_subcommand("export-kernel", "Rebuild kernel CSVs from metrics.jsonl");
  kern->add_option("run-dir", path, "Run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  // --output is just the config's output key, so it resolves like one.
  if (!output.empty()) sets.push_back("output=" + output);

  if (*run) {
    divmin_config* cfg = nullptr;
    if (auto s = load_with_overrides(config_path, sets, &cfg); s != DIVMIN_OK) return report(s);
    divmin_run* r = nullptr;
    auto s = divmin_run_start(cfg, nullptr, print_progress, &log_every, &r);
    divmin_config_free(cfg);
    if (s != DIVMIN_OK) return report(s);
    std::printf("dir %s\nfinal_score %.6g\n", fetch_from(divmin_run_dir, r).c_str(),
                divmin_run_final_score(r));
    if (divmin_run_agent_count(r) > 1) std::printf("best_agent %d\n", divmin_run_best_agent(r));
    divmin_run_free(r);
    return 0;
  }

  if (*sweep) {
    divmin_config* cfg = nullptr;
    if (auto s = load_with_overrides(config_path, sets, &cfg); s != DIVMIN_OK) return report(s);
    divmin_sweep* sw = nullptr;
    auto s = divmin_sweep_start(cfg, axis.c_str(), seeds.c_str(), nullptr, jobs, &sw);
    divmin_config_free(cfg);
    if (s != DIVMIN_OK) return report(s);
    int failed = 0;
    for (int i = 0; i < divmin_sweep_cell_count(sw); ++i) {
      uint64_t seed = 0;
      int ok = 0;
      double score = 0.0;
      divmin_sweep_cell(sw, i, &seed, &ok, &score);
      size_t n = 0;
      divmin_sweep_cell_value(sw, i, nullptr, 0, &n);
      std::string value(n + 1, '\0');
      divmin_sweep_cell_value(sw, i, value.data(), value.size(), &n);
      value.resize(n);
      if (ok) {
        std::printf("%s seed %llu score %.6g\n", value.c_str(), static_cast<unsigned long long>(seed),
                    score);
      } else {
        std::printf("%s seed %llu FAILED\n", value.c_str(), static_cast<unsigned long long>(seed));
        ++failed;
      }
    }
    std::printf("summary %s\n", fetch_from(divmin_sweep_summary_path, sw).c_str());
    divmin_sweep_free(sw);
    return failed ? static_cast<int>(DIVMIN_RUNTIME_ERROR) : 0;
  }

  if (*eval) {
    divmin_eval* ev = nullptr;
    if (auto s = divmin_eval_checkpoint(path.c_str(), episodes, &ev); s != DIVMIN_OK)
      return report(s);
    std::printf("{\"episodes\": %d, \"agents\": [", episodes);
    for (int i = 0; i < divmin_eval_agent_count(ev); ++i) {
      double mean = 0, sd = 0, succ = 0, goal = 0;
      divmin_eval_agent(ev, i, &mean, &sd, &succ, &goal);
      std::printf("%s{\"mean_return\": %.17g, \"std_return\": %.17g, \"success_rate\": %.17g, "
                  "\"goal_fraction\": %.17g}",
                  i ? ", " : "", mean, sd, succ, goal);
    }
    std::printf("]}\n");
    divmin_eval_free(ev);
    return 0;
  }

  if (*heat) {
    if (auto s = divmin_export_heatmap(path.c_str(), episodes); s != DIVMIN_OK) return report(s);
    std::printf("wrote heatmap CSVs in %s\n", path.c_str());
    return 0;
  }

  if (*kern) {
    int n = 0;
    if (auto s = divmin_export_kernel(path.c_str(), &n); s != DIVMIN_OK) return report(s);
    std::printf("wrote %d kernel CSVs in %s\n", n, path.c_str());
    return 0;
  }
  return 0;
}
