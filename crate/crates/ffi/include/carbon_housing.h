/* SPDX-License-Identifier: Apache-2.0 */

#ifndef CARBON_HOUSING_H
#define CARBON_HOUSING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum ChStatus {
  CH_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CH_STATUS_NULL = 1,
  /**
   * Invalid argument, configuration or data.
   */
  CH_STATUS_INVALID = 2,
  /**
   * Numerical failure.
   */
  CH_STATUS_NUMERICAL = 3,
  /**
   * File system error.
   */
  CH_STATUS_IO = 4,
  /**
   * Internal panic, caught at the boundary.
   */
  CH_STATUS_PANIC = 5,
} ChStatus;

/**
 * Kind of renovation decision.
 */
typedef enum ChDecision {
  CH_DECISION_NOW = 0,
  CH_DECISION_AT = 1,
  CH_DECISION_NEVER = 2,
} ChDecision;

typedef struct ChBuilding ChBuilding;

typedef struct ChConfig ChConfig;

typedef struct ChScenario ChScenario;

typedef struct ChSweepResult ChSweepResult;

/**
 * Energy price `f1 * carbon_price + f0` (EUR/kWh).
 */
typedef struct ChEnergy {
  double f1;
  double f0;
} ChEnergy;

/**
 * Renovation cost `c0 * |alpha - alpha_star|^(1 + c1)` (EUR/m2).
 */
typedef struct ChCosts {
  double c0;
  double c1;
} ChCosts;

/**
 * Numeric columns of one sweep row.
 */
typedef struct ChSweepRow {
  double t;
  double mean;
  double ci_lo;
  double ci_hi;
  double x;
  /**
   * Calendar year, `+inf` for never.
   */
  double renovation_date;
  /**
   * Percent; NaN where undefined.
   */
  double slowdown;
} ChSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *ch_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ch_version(void);

/**
 * # Safety
 * `name` must be a NUL-terminated string; `out` a valid pointer.
 */
enum ChStatus ch_scenario_new(const char *name,
                              double t_start,
                              double t_end,
                              double p_carbon0,
                              double eta_delta,
                              struct ChScenario **out_scenario);

/**
 * Number of built-in scenarios.
 */
size_t ch_scenario_builtin_count(void);

/**
 * Built-in scenario `index`, ordered from the mildest to the most
 * stringent policy.
 *
 * # Safety
 * `out_scenario` must be a valid pointer.
 */
enum ChStatus ch_scenario_builtin(size_t index, struct ChScenario **out_scenario);

/**
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void ch_scenario_free(struct ChScenario *scenario);

/**
 * # Safety
 * Pointers must be valid.
 */
enum ChStatus ch_carbon_price(const struct ChScenario *scenario, double t, double *out_price);

/**
 * # Safety
 * `name` must be a NUL-terminated string; `out_building` a valid pointer.
 */
enum ChStatus ch_building_new(const char *name,
                              double c0_price,
                              double surface,
                              double alpha,
                              double alpha_star,
                              double rbar,
                              struct ChBuilding **out_building);

/**
 * # Safety
 * `building` must come from this library and not be used afterwards.
 */
void ch_building_free(struct ChBuilding *building);

/**
 * Optimal renovation decision seen from calendar date `t`. `out_date`
 * receives the renovation year (`t` for now, `+inf` for never).
 *
 * # Safety
 * Pointers must be valid.
 */
enum ChStatus ch_optimal_renovation_date(const struct ChBuilding *building,
                                         const struct ChScenario *scenario,
                                         struct ChEnergy energy_price,
                                         struct ChCosts renovation,
                                         double t,
                                         enum ChDecision *out_kind,
                                         double *out_date);

/**
 * Transition cost per m² at `t`. `points > 0` selects the rectangle rule
 * with that many panels, `0` adaptive quadrature.
 *
 * # Safety
 * Pointers must be valid.
 */
enum ChStatus ch_transition_cost(const struct ChBuilding *building,
                                 const struct ChScenario *scenario,
                                 struct ChEnergy energy_price,
                                 struct ChCosts renovation,
                                 double t,
                                 size_t points,
                                 double *out_cost);

/**
 * Loads a TOML run configuration, or the built-in one for
 * `"builtin:france"`. The configuration is checked in full.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_config` a valid pointer.
 */
enum ChStatus ch_config_load(const char *path, struct ChConfig **out_config);

/**
 * # Safety
 * `config` must be valid.
 */
enum ChStatus ch_config_set_seed(struct ChConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be valid.
 */
enum ChStatus ch_config_set_paths(struct ChConfig *config, size_t n_paths);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards.
 */
void ch_config_free(struct ChConfig *config);

/**
 * Runs the Monte Carlo sweep described by `config`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum ChStatus ch_sweep_run(const struct ChConfig *config, struct ChSweepResult **out_result);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `result` must be valid or null.
 */
size_t ch_sweep_len(const struct ChSweepResult *result);

/**
 * # Safety
 * Pointers must be valid.
 */
enum ChStatus ch_sweep_row(const struct ChSweepResult *result,
                           size_t index,
                           struct ChSweepRow *out_row);

/**
 * Scenario and building names of row `index`. The strings belong to
 * `result` and live until it is freed.
 *
 * # Safety
 * Pointers must be valid.
 */
enum ChStatus ch_sweep_row_names(const struct ChSweepResult *result,
                                 size_t index,
                                 const char **out_scenario,
                                 const char **out_building);

/**
 * Writes the result table as CSV.
 *
 * # Safety
 * Pointers must be valid.
 */
enum ChStatus ch_sweep_write_csv(const struct ChSweepResult *result, const char *path);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards.
 */
void ch_sweep_free(struct ChSweepResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARBON_HOUSING_H */
