#ifndef FXSIM_H
#define FXSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call.
typedef enum FxStatus {
  FX_STATUS_OK = 0,
  FX_STATUS_NULL_POINTER = 1,
  FX_STATUS_INVALID_ARGUMENT = 2,
  FX_STATUS_PARSE_ERROR = 3,
  FX_STATUS_VALIDATION_ERROR = 4,
  FX_STATUS_UNREACHABLE = 5,
  FX_STATUS_JOINT_LIMIT = 6,
  FX_STATUS_MISSION_ERROR = 7,
  FX_STATUS_SIMULATION_ERROR = 8,
  FX_STATUS_IO_ERROR = 9,
  FX_STATUS_PANIC = 10,
} FxStatus;

// A finished mission run: log, report and plan.
typedef struct FxRun FxRun;

// Scenario configuration.
typedef struct FxScenario FxScenario;

// Report figures of a run. `convergence_time` is NaN when the chassis
// errors never settle inside the band.
typedef struct FxMetrics {
  double ee_error_avg[3];
  double ee_error_max[3];
  double chassis_error_max[3];
  double convergence_time;
  double peak_speed;
  double torque_chatter[4];
  double stage1_time;
  double top_spray_time;
  double stage2_time;
  double total_time;
  double discharge_time;
  uint64_t sweep_samples;
  uint32_t fires_serviced;
  bool within_discharge_time;
} FxMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into this library on the same thread.
const char *fx_last_error(void);

// Library version as a static NUL-terminated string.
const char *fx_version(void);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void fx_string_free(char *s);

// New scenario with every key at its default.
//
// # Safety
// `out` must be valid for writing a pointer.
enum FxStatus fx_scenario_default(struct FxScenario **out);

// Scenario parsed from TOML text and validated.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` valid for writing.
enum FxStatus fx_scenario_from_toml(const char *toml, struct FxScenario **out);

// Scenario loaded from a TOML file and validated.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for writing.
enum FxStatus fx_scenario_load(const char *path, struct FxScenario **out);

// The scenario as TOML; free the result with [`fx_string_free`].
//
// # Safety
// `scenario` must be a live handle and `out` valid for writing.
enum FxStatus fx_scenario_to_toml(const struct FxScenario *scenario, char **out);

// # Safety
// `scenario` must come from this library and not have been freed. NULL is
// ignored.
void fx_scenario_free(struct FxScenario *scenario);

// Joint angles (degrees) reaching tool position `x, y, z` (mm, arm base
// frame) with pitch `phi` (degrees). A NULL scenario uses the defaults.
//
// # Safety
// `scenario` must be NULL or a live handle; `joints_deg` must point to
// four writable doubles.
enum FxStatus fx_ik(const struct FxScenario *scenario,
                    double x,
                    double y,
                    double z,
                    double phi_deg,
                    double *joints_deg);

// Tool pose `[x, y, z, phi]` (mm, degrees) for joint angles in degrees.
// Joint limits are enforced.
//
// # Safety
// `scenario` must be NULL or a live handle; `joints_deg` must point to
// four readable doubles and `pose` to four writable doubles.
enum FxStatus fx_fk(const struct FxScenario *scenario, const double *joints_deg, double *pose);

// Minimum and maximum working radius (mm) over a θ2/θ3 grid of
// `resolution_deg`.
//
// # Safety
// `scenario` must be NULL or a live handle; `r_min` and `r_max` must be
// writable.
enum FxStatus fx_workspace_radii(const struct FxScenario *scenario,
                                 double resolution_deg,
                                 double *r_min,
                                 double *r_max);

// Plan summary (circuit, stops, commands and timing) as JSON; free the
// result with [`fx_string_free`].
//
// # Safety
// `scenario` must be NULL or a live handle; `out` must be writable.
enum FxStatus fx_plan_json(const struct FxScenario *scenario, char **out);

// Runs the full mission.
//
// # Safety
// `scenario` must be NULL or a live handle; `out` must be writable.
enum FxStatus fx_simulate(const struct FxScenario *scenario, struct FxRun **out);

// # Safety
// `run` must come from [`fx_simulate`] and not have been freed. NULL is
// ignored.
void fx_run_free(struct FxRun *run);

// Number of logged samples, or 0 for NULL.
//
// # Safety
// `run` must be NULL or a live handle.
size_t fx_run_row_count(const struct FxRun *run);

// # Safety
// `run` must be a live handle and `out` writable.
enum FxStatus fx_run_metrics(const struct FxRun *run, struct FxMetrics *out);

// The mission log as CSV text; free the result with [`fx_string_free`].
//
// # Safety
// `run` must be a live handle and `out` writable.
enum FxStatus fx_run_log_csv(const struct FxRun *run, char **out);

// Writes the log, metrics and plot tables into `dir`, creating it.
//
// # Safety
// `run` must be a live handle and `dir` a NUL-terminated string.
enum FxStatus fx_run_export(const struct FxRun *run, const char *dir);

// Recomputes the report from a log file. A NULL scenario supplies the
// default error band and discharge time.
//
// # Safety
// `path` must be a NUL-terminated string, `scenario` NULL or a live
// handle, and `out` writable.
enum FxStatus fx_metrics_from_csv(const char *path,
                                  const struct FxScenario *scenario,
                                  struct FxMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FXSIM_H */
