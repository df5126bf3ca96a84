#ifndef SAMPLAN_H
#define SAMPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum SamplanStatus {
  SAMPLAN_STATUS_OK = 0,
  SAMPLAN_STATUS_NULL_POINTER = 1,
  SAMPLAN_STATUS_INVALID_UTF8 = 2,
  SAMPLAN_STATUS_INVALID_JSON = 3,
  SAMPLAN_STATUS_INVALID_SCENARIO = 4,
  SAMPLAN_STATUS_INVALID_SPEC = 5,
  SAMPLAN_STATUS_PLANNING_FAILED = 6,
  SAMPLAN_STATUS_OUT_OF_RANGE = 7,
  SAMPLAN_STATUS_INTERNAL = 8,
} SamplanStatus;

/**
 * Output of one planner run: the graph, its trace, and the best path cost.
 */
typedef struct SamplanResult SamplanResult;

/**
 * A validated planning problem.
 */
typedef struct SamplanScenario SamplanScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on the calling thread. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *samplan_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *samplan_version(void);

/**
 * Parses a scenario from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SamplanStatus samplan_scenario_from_json(const char *json, struct SamplanScenario **out);

/**
 * # Safety
 * `scenario` must be null or a handle from [`samplan_scenario_from_json`]
 * that has not been freed.
 */
void samplan_scenario_free(struct SamplanScenario *scenario);

/**
 * Dimension of the scenario, or 0 for a null handle.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
size_t samplan_scenario_dimension(const struct SamplanScenario *scenario);

/**
 * Lebesgue measure of the free space.
 *
 * # Safety
 * `scenario` must be a live handle and `out` writable.
 */
enum SamplanStatus samplan_free_space_measure(const struct SamplanScenario *scenario, double *out);

/**
 * Whether the segment from `a` to `b` (each `dim` coordinates) avoids every
 * obstacle interior.
 *
 * # Safety
 * `a` and `b` must point to `dim` readable doubles; `out` must be writable.
 */
enum SamplanStatus samplan_segment_collision_free(const struct SamplanScenario *scenario,
                                                  const double *a,
                                                  const double *b,
                                                  size_t dim,
                                                  bool *out);

/**
 * Runs the planner described by `spec_json` (a planner spec object, e.g.
 * `{"algorithm": "RRTstar", "n": 1000, "seed": 7}`) on the scenario.
 *
 * # Safety
 * `scenario` must be a live handle, `spec_json` NUL-terminated, `out` writable.
 */
enum SamplanStatus samplan_plan(const struct SamplanScenario *scenario,
                                const char *spec_json,
                                struct SamplanResult **out);

/**
 * # Safety
 * `result` must be null or a live handle from [`samplan_plan`].
 */
void samplan_result_free(struct SamplanResult *result);

/**
 * Cost of the best goal-reaching path, `INFINITY` when none was found.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double samplan_result_best_cost(const struct SamplanResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t samplan_result_vertex_count(const struct SamplanResult *result);

/**
 * Number of directed edges (an undirected roadmap edge counts twice).
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t samplan_result_edge_count(const struct SamplanResult *result);

/**
 * Number of recorded trace rows.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t samplan_result_trace_len(const struct SamplanResult *result);

/**
 * Trace row `index`: iteration and best cost at that iteration.
 *
 * # Safety
 * `result` must be a live handle; the out-pointers must be writable.
 */
enum SamplanStatus samplan_result_trace_at(const struct SamplanResult *result,
                                           size_t index,
                                           size_t *iteration,
                                           double *best_cost);

/**
 * The graph as JSON `{"vertices": [...], "edges": [[u, v, cost], ...],
 * "parent": [...]}`. Free the string with [`samplan_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum SamplanStatus samplan_result_graph_json(const struct SamplanResult *result, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void samplan_string_free(char *s);

/**
 * Connectivity threshold radius of the r-disc graph on `n` points in `d`
 * dimensions.
 *
 * # Safety
 * `out` must be writable.
 */
enum SamplanStatus samplan_connectivity_threshold_radius(size_t n, size_t d, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAMPLAN_H */
