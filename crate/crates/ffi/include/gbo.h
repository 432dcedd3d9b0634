#ifndef GBO_H
#define GBO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum {
  GBO_STATUS_OK = 0,
  GBO_STATUS_NULL_POINTER = 1,
  GBO_STATUS_INVALID_ARGUMENT = 2,
  GBO_STATUS_PARSE = 3,
  GBO_STATUS_IO = 4,
  GBO_STATUS_CONFIG = 5,
  GBO_STATUS_NUMERICAL = 6,
  GBO_STATUS_EXHAUSTED = 7,
  GBO_STATUS_INFEASIBLE = 8,
  GBO_STATUS_OBJECTIVE = 9,
  GBO_STATUS_UNSUPPORTED = 10,
  GBO_STATUS_INVALID_UTF8 = 11,
  GBO_STATUS_PANIC = 12,
} GboStatus;

// A growing list of candidate graphs.
typedef struct GboCandidates GboCandidates;

// Ask/tell optimizer over a fixed candidate list.
typedef struct GboOptimizer GboOptimizer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next call into the library on this thread.
const char *gbo_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string returned by this library, freed once.
void gbo_string_free(char *s);

// Expected improvement of a Gaussian prediction over `y_max`.
//
// # Safety
// `out` must be a valid pointer.
GboStatus gbo_expected_improvement(double mean, double variance, double y_max, double *out);

// Four-dimensional Hartmann function on the unit cube.
//
// # Safety
// `x` must point to `len` doubles and `out` must be valid.
GboStatus gbo_hartmann4(const double *x, size_t len, double *out);

// Creates an empty candidate list.
//
// # Safety
// `out` must be a valid pointer.
GboStatus gbo_candidates_new(GboCandidates **out);

// Reads candidates from a graph file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
GboStatus gbo_candidates_read(const char *path, GboCandidates **out);

// Appends an undirected graph on nodes `0..node_count`. `edges` holds
// `edge_count` pairs as `2 * edge_count` node indices.
//
// # Safety
// `candidates` must be a live handle, `id` a NUL-terminated string and
// `edges` must point to `2 * edge_count` values (may be null when zero).
GboStatus gbo_candidates_add(GboCandidates *candidates,
                             const char *id,
                             size_t node_count,
                             const size_t *edges,
                             size_t edge_count);

// Number of candidates, or 0 for a null handle.
//
// # Safety
// `candidates` must be null or a live handle.
size_t gbo_candidates_len(const GboCandidates *candidates);

// # Safety
// `candidates` must be null or a handle not yet freed.
void gbo_candidates_free(GboCandidates *candidates);

// Builds an optimizer. `options_json` holds `feature_groups` and
// optionally `strategy` (gbo, gbo_base, bo_f or bo_g), `feature_seed`,
// `kernel`, `n_init`, `refit_every` and `hyperopt`, with the same
// meaning as in experiment configs.
//
// # Safety
// `candidates` must be a live handle, `options_json` a NUL-terminated
// string and `out` a valid pointer.
GboStatus gbo_optimizer_new(const GboCandidates *candidates,
                            const char *options_json,
                            uint64_t seed,
                            GboOptimizer **out);

// Index of the next candidate to evaluate.
//
// # Safety
// `optimizer` must be a live handle and `index` a valid pointer.
GboStatus gbo_optimizer_ask(GboOptimizer *optimizer, size_t *index);

// Reports the objective value of candidate `index`.
//
// # Safety
// `optimizer` must be a live handle.
GboStatus gbo_optimizer_tell(GboOptimizer *optimizer, size_t index, double y);

// Best observation so far; fails with `Exhausted` before any `tell`.
//
// # Safety
// `optimizer` must be a live handle; `index` and `y` valid pointers.
GboStatus gbo_optimizer_best(const GboOptimizer *optimizer, size_t *index, double *y);

// Current surrogate hyperparameters as JSON (`null` before the first
// fit). Free the string with [`gbo_string_free`].
//
// # Safety
// `optimizer` must be a live handle and `out` a valid pointer.
GboStatus gbo_optimizer_params_json(const GboOptimizer *optimizer, char **out);

// # Safety
// `optimizer` must be null or a handle not yet freed.
void gbo_optimizer_free(GboOptimizer *optimizer);

// Runs an experiment config. Relative paths inside it resolve against
// the config's directory. `out_dir` may be null to skip writing files;
// `jobs` of 0 uses every core. The summary JSON is written to
// `summary_json` when it is not null.
//
// # Safety
// String arguments must be NUL-terminated (or null where allowed) and
// `summary_json` null or a valid pointer.
GboStatus gbo_run_experiment(const char *config_path,
                             const char *out_dir,
                             size_t jobs,
                             uint64_t seed_base,
                             char **summary_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GBO_H */
