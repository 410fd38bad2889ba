#ifndef DEFICIT_LAB_H
#define DEFICIT_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DlObjective {
  DL_CHV = 0,
  DL_DELTA_CL = 1,
  DL_DEFICIT = 2,
} DlObjective;

/**
 * Result code of every fallible call.
 */
typedef enum DlStatus {
  DL_OK = 0,
  DL_NULL_POINTER = 1,
  DL_INVALID_ARGUMENT = 2,
  DL_DIMENSION_MISMATCH = 3,
  DL_INVALID_STATE = 4,
  DL_NUMERICAL = 5,
  DL_PANIC = 6,
} DlStatus;

typedef enum DlSubsystem {
  /**
   * The whole bipartite state.
   */
  DL_JOINT = 0,
  DL_ALICE = 1,
  DL_BOB = 2,
} DlSubsystem;

/**
 * Opaque projective measurement on Alice.
 */
typedef struct DlMeasurement DlMeasurement;

/**
 * Opaque bipartite density matrix.
 */
typedef struct DlState DlState;

typedef struct DlMeasureReport {
  double c_hv;
  double delta_cl;
  double deficit_q;
  double alice_entropy_cost;
  double mutual_information;
} DlMeasureReport;

typedef struct DlOptimizerConfig {
  uint32_t grid_points_per_angle;
  uint32_t restarts;
  uint64_t seed;
  double refine_tolerance;
  uint32_t max_refine_iterations;
  bool support_restricted;
} DlOptimizerConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a state from a `(d_a d_b) x (d_a d_b)` row-major complex matrix.
 *
 * # Safety
 * `re_im` must point to `2 (d_a d_b)^2` readable doubles and `out` to a
 * writable handle slot.
 */
enum DlStatus dl_state_from_matrix(size_t d_a,
                                   size_t d_b,
                                   const double *re_im,
                                   struct DlState **out);

/**
 * Creates the projector onto a unit vector of `d_a d_b` amplitudes.
 *
 * # Safety
 * `re_im` must point to `2 d_a d_b` readable doubles and `out` to a
 * writable handle slot.
 */
enum DlStatus dl_state_from_pure(size_t d_a, size_t d_b, const double *re_im, struct DlState **out);

/**
 * The two-qubit amplitude-damping example state.
 *
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum DlStatus dl_state_sw99(struct DlState **out);

/**
 * The qutrit-qubit Bloch-affine example state.
 *
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum DlStatus dl_state_knr01(struct DlState **out);

/**
 * Releases a state. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle from this library not yet freed.
 */
void dl_state_free(struct DlState *state);

/**
 * # Safety
 * `state` must be a live handle; `d_a` and `d_b` writable.
 */
enum DlStatus dl_state_dims(const struct DlState *state, size_t *d_a, size_t *d_b);

/**
 * Copies the density matrix into `re_im` (`2 (d_a d_b)^2` doubles).
 *
 * # Safety
 * `state` must be a live handle and `re_im` writable for `len` doubles.
 */
enum DlStatus dl_state_matrix(const struct DlState *state, double *re_im, size_t len);

/**
 * Von Neumann entropy in bits of the state or one of its marginals;
 * `which` is a [`DlSubsystem`] value.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum DlStatus dl_entropy(const struct DlState *state, int32_t which, double *out);

/**
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum DlStatus dl_mutual_information(const struct DlState *state, double *out);

/**
 * Rank-1 measurement from `dim` basis vectors of `dim` amplitudes each,
 * stored one vector after another.
 *
 * # Safety
 * `re_im` must point to `2 dim^2` readable doubles and `out` to a writable
 * handle slot.
 */
enum DlStatus dl_measurement_from_basis(size_t dim,
                                        const double *re_im,
                                        struct DlMeasurement **out);

/**
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum DlStatus dl_measurement_computational(size_t dim, struct DlMeasurement **out);

/**
 * Measurement in the eigenbasis of Alice's reduced state.
 *
 * # Safety
 * `state` must be a live handle and `out` a writable handle slot.
 */
enum DlStatus dl_measurement_eigenbasis(const struct DlState *state, struct DlMeasurement **out);

/**
 * Releases a measurement. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void dl_measurement_free(struct DlMeasurement *m);

/**
 * # Safety
 * `state` and `m` must be live handles and `out` writable.
 */
enum DlStatus dl_measure_report(const struct DlState *state,
                                const struct DlMeasurement *m,
                                struct DlMeasureReport *out);

/**
 * Dephases Alice in `m`, returning a new state.
 *
 * # Safety
 * `state` and `m` must be live handles and `out` a writable handle slot.
 */
enum DlStatus dl_dephase(const struct DlState *state,
                         const struct DlMeasurement *m,
                         struct DlState **out);

struct DlOptimizerConfig dl_optimizer_config_default(void);

/**
 * Optimizes `objective` (a [`DlObjective`] value) over rank-1 measurements
 * on Alice. `config` may be
 * null for the defaults; `best` may be null when the optimal measurement is
 * not needed.
 *
 * # Safety
 * `state` must be a live handle, `config` null or readable, `value`
 * writable and `best` null or a writable handle slot.
 */
enum DlStatus dl_optimize(const struct DlState *state,
                          int32_t objective,
                          const struct DlOptimizerConfig *config,
                          double *value,
                          struct DlMeasurement **best);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *dl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dl_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DEFICIT_LAB_H */
