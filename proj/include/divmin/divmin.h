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

/* C interface to the divmin library.
 *
 * Every function returns a divmin_status. On failure the message of the most
 * recent error on the calling thread is available from divmin_last_error()
 * until the next failing call. Objects are opaque and owned by the caller,
 * who releases them with the matching *_free function (NULL is accepted).
 *
 * String outputs use a caller buffer: the function writes at most cap bytes
 * including the terminator and stores the full length (without terminator)
 * in *needed when needed is not NULL. A buffer that is too small yields
 * DIVMIN_INVALID_ARGUMENT with *needed set; buf NULL with cap 0 is a plain
 * size query and succeeds.
 */
#ifndef DIVMIN_DIVMIN_H_
#define DIVMIN_DIVMIN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DIVMIN_API __declspec(dllexport)
#else
#define DIVMIN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum divmin_status {
  DIVMIN_OK = 0,
  DIVMIN_INVALID_ARGUMENT = 1,
  DIVMIN_CONFIG_ERROR = 2,
  DIVMIN_IO_ERROR = 3,
  DIVMIN_FORMAT_ERROR = 4,
  DIVMIN_RUNTIME_ERROR = 5
} divmin_status;

typedef struct divmin_config divmin_config;
typedef struct divmin_run divmin_run;
typedef struct divmin_sweep divmin_sweep;
typedef struct divmin_eval divmin_eval;
typedef struct divmin_checkpoint divmin_checkpoint;

/* Called after each training iteration. */
typedef void (*divmin_progress_fn)(int iteration, int total, double mean_return, void* user);

DIVMIN_API const char* divmin_version(void);
DIVMIN_API const char* divmin_last_error(void);
DIVMIN_API const char* divmin_status_name(divmin_status status);

/* Configuration. */
DIVMIN_API divmin_status divmin_config_new(divmin_config** out);
DIVMIN_API divmin_status divmin_config_parse(const char* text, divmin_config** out);
DIVMIN_API divmin_status divmin_config_load(const char* path, divmin_config** out);
DIVMIN_API void divmin_config_free(divmin_config* cfg);
DIVMIN_API divmin_status divmin_config_set(divmin_config* cfg, const char* key, const char* value);
DIVMIN_API divmin_status divmin_config_get(const divmin_config* cfg, const char* key, char* buf,
                                           size_t cap, size_t* needed);
/* The full configuration in file syntax. */
DIVMIN_API divmin_status divmin_config_format(const divmin_config* cfg, char* buf, size_t cap,
                                              size_t* needed);
/* Output directory the config resolves to (honours DIVMIN_OUTPUT_ROOT). */
DIVMIN_API divmin_status divmin_config_output_dir(const divmin_config* cfg, char* buf, size_t cap,
                                                  size_t* needed);

/* Training run. output_dir may be NULL to use the config's output. */
DIVMIN_API divmin_status divmin_run_start(const divmin_config* cfg, const char* output_dir,
                                          divmin_progress_fn progress, void* user,
                                          divmin_run** out);
DIVMIN_API void divmin_run_free(divmin_run* run);
DIVMIN_API double divmin_run_final_score(const divmin_run* run);
DIVMIN_API int divmin_run_best_agent(const divmin_run* run);
DIVMIN_API int divmin_run_agent_count(const divmin_run* run);
DIVMIN_API divmin_status divmin_run_agent(const divmin_run* run, int index, double* final_score,
                                          double* eval_return, double* eval_success_rate,
                                          double* eval_goal_fraction);
DIVMIN_API divmin_status divmin_run_dir(const divmin_run* run, char* buf, size_t cap,
                                        size_t* needed);

/* Sweep over one axis ("nu=0,0.5,1", "C=1,10", "p_m=0,0.5" or any config
 * key) and a seed list ("0,1,2" or "0-4"). */
DIVMIN_API divmin_status divmin_sweep_start(const divmin_config* base, const char* axis,
                                            const char* seeds, const char* output_dir, int jobs,
                                            divmin_sweep** out);
DIVMIN_API void divmin_sweep_free(divmin_sweep* sweep);
DIVMIN_API int divmin_sweep_cell_count(const divmin_sweep* sweep);
DIVMIN_API divmin_status divmin_sweep_cell(const divmin_sweep* sweep, int index, uint64_t* seed,
                                           int* ok, double* final_score);
DIVMIN_API divmin_status divmin_sweep_cell_value(const divmin_sweep* sweep, int index, char* buf,
                                                 size_t cap, size_t* needed);
DIVMIN_API divmin_status divmin_sweep_summary_path(const divmin_sweep* sweep, char* buf,
                                                   size_t cap, size_t* needed);

/* Evaluation of a stored checkpoint; path is a checkpoint file or run dir. */
DIVMIN_API divmin_status divmin_eval_checkpoint(const char* path, int episodes, divmin_eval** out);
DIVMIN_API void divmin_eval_free(divmin_eval* eval);
DIVMIN_API int divmin_eval_agent_count(const divmin_eval* eval);
DIVMIN_API divmin_status divmin_eval_agent(const divmin_eval* eval, int index, double* mean_return,
                                           double* std_return, double* success_rate,
                                           double* goal_fraction);

/* Exports rebuilt inside an existing run directory. */
DIVMIN_API divmin_status divmin_export_heatmap(const char* run_dir, int episodes);
DIVMIN_API divmin_status divmin_export_kernel(const char* run_dir, int* files_written);

/* Raw checkpoint access. */
DIVMIN_API divmin_status divmin_checkpoint_load(const char* path, divmin_checkpoint** out);
DIVMIN_API void divmin_checkpoint_free(divmin_checkpoint* ckpt);
DIVMIN_API int divmin_checkpoint_entry_count(const divmin_checkpoint* ckpt);
DIVMIN_API divmin_status divmin_checkpoint_entry(const divmin_checkpoint* ckpt, int index,
                                                 const char** key, int* rows, int* cols);
/* Copies rows * cols values in row-major order. */
DIVMIN_API divmin_status divmin_checkpoint_entry_data(const divmin_checkpoint* ckpt, int index,
                                                      double* out, size_t count);

#ifdef __cplusplus
}
#endif

#endif /* DIVMIN_DIVMIN_H_ */
