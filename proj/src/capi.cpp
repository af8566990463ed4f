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

#include "divmin/divmin.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "divmin/runner.hpp"

struct divmin_config {
  divmin::ExperimentConfig cfg;
};
struct divmin_run {
  divmin::RunSummary summary;
  std::string dir;
};
struct divmin_sweep {
  divmin::SweepResult result;
  std::string summary;
};
struct divmin_eval {
  divmin::CheckpointEval eval;
};
struct divmin_checkpoint {
  divmin::Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

divmin_status fail(divmin_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps the exception in flight onto a status code.
divmin_status translate() {
  try {
    throw;
  } catch (const divmin::ConfigError& e) {
    return fail(DIVMIN_CONFIG_ERROR, e.what());
  } catch (const divmin::CheckpointError& e) {
    return fail(DIVMIN_FORMAT_ERROR, e.what());
  } catch (const divmin::IoError& e) {
    return fail(DIVMIN_IO_ERROR, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(DIVMIN_IO_ERROR, e.what());
  } catch (const divmin::ContractViolation& e) {
    return fail(DIVMIN_INVALID_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(DIVMIN_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(DIVMIN_RUNTIME_ERROR, e.what());
  } catch (...) {
    return fail(DIVMIN_RUNTIME_ERROR, "unknown error");
  }
}

template <class F>
divmin_status guarded(F&& f) {
  try {
    f();
    return DIVMIN_OK;
  } catch (...) {
    return translate();
  }
}

divmin_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size();
  if (!buf && cap == 0) return DIVMIN_OK;  // size query
  if (!buf || cap < s.size() + 1) return fail(DIVMIN_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  return DIVMIN_OK;
}

#define DIVMIN_REQUIRE(cond, what) \
  if (!(cond)) return fail(DIVMIN_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* divmin_version(void) { return DIVMIN_VERSION; }

const char* divmin_last_error(void) { return g_last_error.c_str(); }

const char* divmin_status_name(divmin_status status) {
  switch (status) {
    case DIVMIN_OK: return "ok";
    case DIVMIN_INVALID_ARGUMENT: return "invalid argument";
    case DIVMIN_CONFIG_ERROR: return "config error";
    case DIVMIN_IO_ERROR: return "io error";
    case DIVMIN_FORMAT_ERROR: return "format error";
    case DIVMIN_RUNTIME_ERROR: return "runtime error";
  }
  return "unknown status";
}

divmin_status divmin_config_new(divmin_config** out) {
  DIVMIN_REQUIRE(out, "out is null");
  return guarded([&] { *out = new divmin_config{}; });
}

divmin_status divmin_config_parse(const char* text, divmin_config** out) {
  DIVMIN_REQUIRE(text && out, "null argument");
  return guarded([&] { *out = new divmin_config{divmin::parse_config(text)}; });
}

divmin_status divmin_config_load(const char* path, divmin_config** out) {
  DIVMIN_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new divmin_config{divmin::load_config(path)}; });
}

void divmin_config_free(divmin_config* cfg) { delete cfg; }

divmin_status divmin_config_set(divmin_config* cfg, const char* key, const char* value) {
  DIVMIN_REQUIRE(cfg && key && value, "null argument");
  return guarded([&] { divmin::set_config_value(cfg->cfg, key, value); });
}

divmin_status divmin_config_get(const divmin_config* cfg, const char* key, char* buf, size_t cap,
                                size_t* needed) {
  DIVMIN_REQUIRE(cfg && key, "null argument");
  std::string v;
  if (auto s = guarded([&] { v = divmin::get_config_value(cfg->cfg, key); }); s != DIVMIN_OK)
    return s;
  return copy_out(v, buf, cap, needed);
}

divmin_status divmin_config_format(const divmin_config* cfg, char* buf, size_t cap,
                                   size_t* needed) {
  DIVMIN_REQUIRE(cfg, "null argument");
  return copy_out(divmin::format_config(cfg->cfg), buf, cap, needed);
}

divmin_status divmin_config_output_dir(const divmin_config* cfg, char* buf, size_t cap,
                                       size_t* needed) {
  DIVMIN_REQUIRE(cfg, "null argument");
  std::string v;
  if (auto s = guarded([&] { v = divmin::resolve_output(cfg->cfg).string(); }); s != DIVMIN_OK)
    return s;
  return copy_out(v, buf, cap, needed);
}

divmin_status divmin_run_start(const divmin_config* cfg, const char* output_dir,
                               divmin_progress_fn progress, void* user, divmin_run** out) {
  DIVMIN_REQUIRE(cfg && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const std::filesystem::path dir =
        output_dir ? std::filesystem::path(output_dir) : divmin::resolve_output(cfg->cfg);
    divmin::ProgressFn fn;
    if (progress) fn = [progress, user](int it, int total, double r) { progress(it, total, r, user); };
    auto run = std::make_unique<divmin_run>();
    run->summary = divmin::run_experiment(cfg->cfg, dir, fn);
    run->dir = dir.string();
    *out = run.release();
  });
}

void divmin_run_free(divmin_run* run) { delete run; }

double divmin_run_final_score(const divmin_run* run) {
  return run ? run->summary.final_score : 0.0;
}

int divmin_run_best_agent(const divmin_run* run) { return run ? run->summary.best_agent : -1; }

int divmin_run_agent_count(const divmin_run* run) {
  return run ? static_cast<int>(run->summary.agents.size()) : 0;
}

divmin_status divmin_run_agent(const divmin_run* run, int index, double* final_score,
                               double* eval_return, double* eval_success_rate,
                               double* eval_goal_fraction) {
  DIVMIN_REQUIRE(run, "null argument");
  DIVMIN_REQUIRE(index >= 0 && index < divmin_run_agent_count(run), "agent index out of range");
  const auto& a = run->summary.agents[static_cast<std::size_t>(index)];
  if (final_score) *final_score = a.final_score;
  if (eval_return) *eval_return = a.eval_return;
  if (eval_success_rate) *eval_success_rate = a.eval_success_rate;
  if (eval_goal_fraction) *eval_goal_fraction = a.eval_goal_fraction;
  return DIVMIN_OK;
}

divmin_status divmin_run_dir(const divmin_run* run, char* buf, size_t cap, size_t* needed) {
  DIVMIN_REQUIRE(run, "null argument");
  return copy_out(run->dir, buf, cap, needed);
}

divmin_status divmin_sweep_start(const divmin_config* base, const char* axis, const char* seeds,
                                 const char* output_dir, int jobs, divmin_sweep** out) {
  DIVMIN_REQUIRE(base && axis && seeds && out, "null argument");
  DIVMIN_REQUIRE(jobs >= 1, "jobs must be at least 1");
  *out = nullptr;
  return guarded([&] {
    const auto ax = divmin::parse_axis(axis);
    const auto seed_list = divmin::parse_seeds(seeds);
    const std::filesystem::path dir =
        output_dir ? std::filesystem::path(output_dir) : divmin::resolve_output(base->cfg);
    auto sweep = std::make_unique<divmin_sweep>();
    sweep->result = divmin::run_sweep(base->cfg, ax, seed_list, dir, jobs);
    sweep->summary = sweep->result.summary_csv.string();
    *out = sweep.release();
  });
}

void divmin_sweep_free(divmin_sweep* sweep) { delete sweep; }

int divmin_sweep_cell_count(const divmin_sweep* sweep) {
  return sweep ? static_cast<int>(sweep->result.cells.size()) : 0;
}

divmin_status divmin_sweep_cell(const divmin_sweep* sweep, int index, uint64_t* seed, int* ok,
                                double* final_score) {
  DIVMIN_REQUIRE(sweep, "null argument");
  DIVMIN_REQUIRE(index >= 0 && index < divmin_sweep_cell_count(sweep), "cell index out of range");
  const auto& c = sweep->result.cells[static_cast<std::size_t>(index)];
  if (seed) *seed = c.seed;
  if (ok) *ok = c.ok ? 1 : 0;
  if (final_score) *final_score = c.final_score;
  return DIVMIN_OK;
}

divmin_status divmin_sweep_cell_value(const divmin_sweep* sweep, int index, char* buf, size_t cap,
                                      size_t* needed) {
  DIVMIN_REQUIRE(sweep, "null argument");
  DIVMIN_REQUIRE(index >= 0 && index < divmin_sweep_cell_count(sweep), "cell index out of range");
  return copy_out(sweep->result.cells[static_cast<std::size_t>(index)].value, buf, cap, needed);
}

divmin_status divmin_sweep_summary_path(const divmin_sweep* sweep, char* buf, size_t cap,
                                        size_t* needed) {
  DIVMIN_REQUIRE(sweep, "null argument");
  return copy_out(sweep->summary, buf, cap, needed);
}

divmin_status divmin_eval_checkpoint(const char* path, int episodes, divmin_eval** out) {
  DIVMIN_REQUIRE(path && out, "null argument");
  DIVMIN_REQUIRE(episodes >= 1, "episodes must be at least 1");
  *out = nullptr;
  return guarded([&] { *out = new divmin_eval{divmin::evaluate_checkpoint(path, episodes)}; });
}

void divmin_eval_free(divmin_eval* eval) { delete eval; }

int divmin_eval_agent_count(const divmin_eval* eval) {
  return eval ? static_cast<int>(eval->eval.agents.size()) : 0;
}

divmin_status divmin_eval_agent(const divmin_eval* eval, int index, double* mean_return,
                                double* std_return, double* success_rate, double* goal_fraction) {
  DIVMIN_REQUIRE(eval, "null argument");
  DIVMIN_REQUIRE(index >= 0 && index < divmin_eval_agent_count(eval), "agent index out of range");
  const auto& a = eval->eval.agents[static_cast<std::size_t>(index)];
  if (mean_return) *mean_return = a.mean_return;
  if (std_return) *std_return = a.std_return;
  if (success_rate) *success_rate = a.success_rate;
  if (goal_fraction) *goal_fraction = a.goal_fraction;
  return DIVMIN_OK;
}

divmin_status divmin_export_heatmap(const char* run_dir, int episodes) {
  DIVMIN_REQUIRE(run_dir, "null argument");
  DIVMIN_REQUIRE(episodes >= 1, "episodes must be at least 1");
  return guarded([&] { divmin::export_heatmap(run_dir, episodes); });
}

divmin_status divmin_export_kernel(const char* run_dir, int* files_written) {
  DIVMIN_REQUIRE(run_dir, "null argument");
  return guarded([&] {
    const int n = divmin::export_kernel(run_dir);
    if (files_written) *files_written = n;
  });
}

divmin_status divmin_checkpoint_load(const char* path, divmin_checkpoint** out) {
  DIVMIN_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new divmin_checkpoint{divmin::load_checkpoint(path)}; });
}

void divmin_checkpoint_free(divmin_checkpoint* ckpt) { delete ckpt; }

int divmin_checkpoint_entry_count(const divmin_checkpoint* ckpt) {
  return ckpt ? static_cast<int>(ckpt->ckpt.entries().size()) : 0;
}

divmin_status divmin_checkpoint_entry(const divmin_checkpoint* ckpt, int index, const char** key,
                                      int* rows, int* cols) {
  DIVMIN_REQUIRE(ckpt, "null argument");
  DIVMIN_REQUIRE(index >= 0 && index < divmin_checkpoint_entry_count(ckpt),
                 "entry index out of range");
  const auto& e = ckpt->ckpt.entries()[static_cast<std::size_t>(index)];
  if (key) *key = e.key.c_str();
  if (rows) *rows = static_cast<int>(e.value.rows());
  if (cols) *cols = static_cast<int>(e.value.cols());
  return DIVMIN_OK;
}

divmin_status divmin_checkpoint_entry_data(const divmin_checkpoint* ckpt, int index, double* out,
                                           size_t count) {
  DIVMIN_REQUIRE(ckpt && out, "null argument");
  DIVMIN_REQUIRE(index >= 0 && index < divmin_checkpoint_entry_count(ckpt),
                 "entry index out of range");
  const auto& m = ckpt->ckpt.entries()[static_cast<std::size_t>(index)].value;
  DIVMIN_REQUIRE(count == static_cast<size_t>(m.size()), "count does not match entry size");
  std::memcpy(out, m.data(), count * sizeof(double));  // Mat is row-major
  return DIVMIN_OK;
}

}  // extern "C"
