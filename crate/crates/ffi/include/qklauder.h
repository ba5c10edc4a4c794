#ifndef QKLAUDER_H
#define QKLAUDER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QkStatus {
  QK_STATUS_OK = 0,
  QK_STATUS_INVALID_ARGUMENT = 1,
  QK_STATUS_NULL_POINTER = 2,
  QK_STATUS_DIVERGENCE = 3,
  QK_STATUS_NON_CONVERGENCE = 4,
  QK_STATUS_OVERFLOW = 5,
  QK_STATUS_NO_REVIVAL_STRUCTURE = 6,
  QK_STATUS_INTERNAL = 7,
  QK_STATUS_PANIC = 8,
} QkStatus;

/**
 * A coherent state together with the physical scales used for its observables.
 */
typedef struct QkState QkState;

typedef struct QkUncertainty {
  double dx;
  double dp;
  double product;
  double bound;
  double ratio;
} QkUncertainty;

typedef struct QkRevivalTimes {
  double n_bar;
  double t_cl;
  double t_rev;
  double t_suprev;
} QkRevivalTimes;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *qk_last_error(void);

/**
 * Creates `|J, gamma>_q` with default truncation. `*out` receives the handle.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QkStatus qk_state_new(double q,
                           double j,
                           double gamma,
                           double hbar,
                           double mass,
                           double omega,
                           struct QkState **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void qk_state_free(struct QkState *state);

/**
 * New handle for the state evolved by `dt`.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for writes.
 */
enum QkStatus qk_state_evolve(const struct QkState *state, double dt, struct QkState **out);

/**
 * `<X>` of the state.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for writes.
 */
enum QkStatus qk_state_expect_x(const struct QkState *state, double *out);

/**
 * `<P>` of the state.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for writes.
 */
enum QkStatus qk_state_expect_p(const struct QkState *state, double *out);

/**
 * Uncertainty product and its lower bound.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for writes.
 */
enum QkStatus qk_state_uncertainty(const struct QkState *state, struct QkUncertainty *out);

/**
 * Overlap of the state with itself evolved by `t`; independent of the state's angle.
 *
 * # Safety
 * `state` must be a live handle; `re` and `im` valid for writes.
 */
enum QkStatus qk_state_autocorrelation(const struct QkState *state,
                                       double t,
                                       double *re,
                                       double *im);

/**
 * `E_q(J)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QkStatus qk_q_exponential(double q, double j, double *out);

/**
 * `F_q(J, gamma)`.
 *
 * # Safety
 * `re` and `im` must be valid for writes.
 */
enum QkStatus qk_f_q(double q, double j, double gamma, double *re, double *im);

/**
 * Mean occupation `J E_q'(J) / E_q(J)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QkStatus qk_mean_occupation(double q, double j, double *out);

/**
 * Classical, revival and superrevival times.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QkStatus qk_revival_times(double q,
                               double j,
                               double hbar,
                               double mass,
                               double omega,
                               struct QkRevivalTimes *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QKLAUDER_H */
