#ifndef FKC_H
#define FKC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FkcStatus {
  FKC_STATUS_OK = 0,
  FKC_STATUS_NULL_POINTER = 1,
  FKC_STATUS_INVALID_ARGUMENT = 2,
  FKC_STATUS_PARSE = 3,
  FKC_STATUS_ASSUMPTION = 4,
  FKC_STATUS_DOMAIN = 5,
  FKC_STATUS_NOT_CONVERGED = 6,
  FKC_STATUS_REFUSED = 7,
  FKC_STATUS_NOT_AVAILABLE = 8,
  FKC_STATUS_IO = 9,
  FKC_STATUS_PANIC = 10,
} FkcStatus;

typedef enum FkcRoute {
  FKC_ROUTE_BETA = 0,
  FKC_ROUTE_BETA_HAT = 1,
  FKC_ROUTE_SUPPLIED = 2,
} FkcRoute;

/**
 * Test function for [`fkc_feynman_kac`].
 */
typedef enum FkcTestFunction {
  /**
   * `f ≡ 1`.
   */
  FKC_TEST_FUNCTION_ONE = 0,
  /**
   * Smooth bump supported on `(-width, width)`.
   */
  FKC_TEST_FUNCTION_BUMP = 1,
  /**
   * Indicator of `(-width, width)`.
   */
  FKC_TEST_FUNCTION_BALL = 2,
} FkcTestFunction;

/**
 * Opaque scenario handle.
 */
typedef struct FkcScenario FkcScenario;

/**
 * Flags are 1 for "yes" and 0 for "not established".
 */
typedef struct FkcVerdict {
  int32_t iu;
  int32_t is;
  int32_t ih;
  enum FkcRoute route;
  double p;
  double r_squared;
  /**
   * 1 stable, 0 unstable, -1 no scan.
   */
  int32_t scan_stable;
} FkcVerdict;

typedef struct FkcEstimate {
  double value;
  double stderr;
  size_t n;
} FkcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses scenario config text; `[scenario]` may omit `id` and `task`.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FkcStatus fkc_scenario_new(const char *config, struct FkcScenario **out);

/**
 * # Safety
 * `scenario` must come from [`fkc_scenario_new`] and not be used afterwards. Null is ignored.
 */
void fkc_scenario_free(struct FkcScenario *scenario);

/**
 * `ρ(|z|)` for a one-dimensional displacement `z ≠ 0`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FkcStatus fkc_kernel_eval(const struct FkcScenario *scenario, double z, double *out);

/**
 * `φ(x) = J*(x) / (1 + V*(x))` on the first axis.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FkcStatus fkc_phi_lower(const struct FkcScenario *scenario, double x, double *out);

/**
 * Contractivity verdict with default options.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FkcStatus fkc_classify(const struct FkcScenario *scenario, struct FkcVerdict *out);

/**
 * Ground state on `[-L, L]` with `n` nodes (odd). `phi` may be null, otherwise it
 * receives `n` values of `φ_1` normalized in `L²`.
 *
 * # Safety
 * `lambda1` must be valid; `phi`, if not null, must hold `n` doubles.
 */
enum FkcStatus fkc_ground_state(const struct FkcScenario *scenario,
                                double half_width,
                                size_t n,
                                double *lambda1,
                                double *phi);

/**
 * Monte Carlo `E^x[exp(-∫_0^t V(X_s) ds) f(X_t)]`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FkcStatus fkc_feynman_kac(const struct FkcScenario *scenario,
                               double x,
                               double t,
                               double dt,
                               size_t paths,
                               uint64_t seed,
                               enum FkcTestFunction f,
                               double width,
                               struct FkcEstimate *out);

/**
 * Runs a scenario file like `fkc run`. `exit_status` receives the CLI exit code.
 *
 * # Safety
 * Strings must be NUL-terminated; `exit_status` must be valid.
 */
enum FkcStatus fkc_run_config(const char *path, const char *out_dir, int32_t *exit_status);

/**
 * Message of the last failure on this thread, or null. Valid until the next call
 * into this library on the same thread.
 */
const char *fkc_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *fkc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FKC_H */
