#ifndef V2V_OFFLOAD_H
#define V2V_OFFLOAD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VecStatus {
  VEC_STATUS_OK = 0,
  VEC_STATUS_NULL_ARGUMENT = 1,
  VEC_STATUS_INVALID_UTF8 = 2,
  VEC_STATUS_INVALID_ARGUMENT = 3,
  VEC_STATUS_CONFIG_ERROR = 4,
  VEC_STATUS_INFEASIBLE = 5,
  VEC_STATUS_INTERNAL = 6,
} VecStatus;

/**
 * A built scenario: fleet, tasks, trace and departures.
 */
typedef struct VecScenario VecScenario;

typedef struct VecMetrics {
  double makespan;
  double planned_makespan;
  double avg_subtask_delay;
  uint64_t reoffload_count;
  uint64_t failed_tasks;
  bool infeasible;
} VecMetrics;

typedef struct VecChannel {
  /**
   * Hz.
   */
  double bandwidth;
  /**
   * Watts.
   */
  double tx_power;
  double channel_gain;
  /**
   * Watts.
   */
  double noise_power;
} VecChannel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *vec_last_error_message(void);

/**
 * Parses a TOML scenario and builds it. `*out` receives a handle to free
 * with `vec_scenario_free`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum VecStatus vec_scenario_from_toml(const char *toml, struct VecScenario **out);

/**
 * # Safety
 * `scenario` must come from `vec_scenario_from_toml` and not be used afterwards.
 * Null is ignored.
 */
void vec_scenario_free(struct VecScenario *scenario);

/**
 * Vehicle and subtask counts of a scenario.
 *
 * # Safety
 * All pointers must be valid.
 */
enum VecStatus vec_scenario_counts(const struct VecScenario *scenario,
                                   size_t *vehicles,
                                   size_t *subtasks);

/**
 * Plans and executes the scenario with `solver` (hgsa, random, df, scf, ssf
 * or brute). An infeasible plan still fills `out` and returns `VEC_STATUS_INFEASIBLE`.
 *
 * # Safety
 * `scenario` must be a live handle, `solver` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum VecStatus vec_scenario_simulate(const struct VecScenario *scenario,
                                     const char *solver,
                                     bool filter_on,
                                     struct VecMetrics *out);

/**
 * Solves a bare cost matrix (`rows`×`cols`, row-major, `INFINITY` marks a
 * non-candidate). `stays` may be null for vehicles that never leave;
 * otherwise it holds `cols` values. `assignment` receives `rows` column indices.
 *
 * # Safety
 * Buffers must hold the stated number of elements.
 */
enum VecStatus vec_solve_costs(const double *costs,
                               size_t rows,
                               size_t cols,
                               const double *stays,
                               const char *solver,
                               uint64_t seed,
                               size_t *assignment,
                               double *makespan);

/**
 * Default channel parameters.
 */
struct VecChannel vec_channel_default(void);

/**
 * Single-hop rate in bit/s with the band shared among `m_prime` subtasks.
 *
 * # Safety
 * `out` must be valid.
 */
enum VecStatus vec_direct_rate(struct VecChannel channel, size_t m_prime, double *out);

/**
 * Seconds to move `size` bits over `hops` hops.
 *
 * # Safety
 * `out` must be valid.
 */
enum VecStatus vec_tran_delay(double size,
                              struct VecChannel channel,
                              size_t m_prime,
                              uint32_t hops,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* V2V_OFFLOAD_H */
