#ifndef ADIAMETRIC_H
#define ADIAMETRIC_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AmStatus {
  AM_STATUS_OK = 0,
  AM_STATUS_NULL_POINTER = 1,
  AM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The Hamiltonian has complex eigenvalues; no positive metric exists.
   */
  AM_STATUS_COMPLEX_SPECTRUM = 3,
  AM_STATUS_NOT_PSEUDO_HERMITIAN = 4,
  /**
   * Integration, decomposition or convergence failure.
   */
  AM_STATUS_SOLVER_FAILURE = 5,
  AM_STATUS_SINGULAR_MATRIX = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  AM_STATUS_PANIC = 7,
} AmStatus;

/**
 * Metric solver selector for [`am_evolve`].
 */
typedef enum AmSolver {
  AM_SOLVER_RUNGE_KUTTA = 0,
  AM_SOLVER_PROPAGATOR_CONJUGATION = 1,
  AM_SOLVER_PICARD = 2,
  AM_SOLVER_NORMAL_ORDERED_SERIES = 3,
} AmSolver;

/**
 * Opaque square complex matrix.
 */
typedef struct AmMatrix AmMatrix;

/**
 * Opaque sampled metric trajectory.
 */
typedef struct AmTrajectory AmTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *am_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next `am_*` call on the same thread.
 */
const char *am_last_error_message(void);

/**
 * Builds a `dim × dim` matrix from row-major real and imaginary parts.
 * `im` may be NULL for a real matrix.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `dim * dim` doubles; `out` must
 * be a valid pointer.
 */
enum AmStatus am_matrix_new(size_t dim, const double *re, const double *im, struct AmMatrix **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum AmStatus am_matrix_identity(size_t dim, struct AmMatrix **out);

/**
 * Releases a matrix; NULL is ignored.
 *
 * # Safety
 * `m` must come from this library and not be used afterwards.
 */
void am_matrix_free(struct AmMatrix *m);

/**
 * Dimension of `m`, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t am_matrix_dim(const struct AmMatrix *m);

/**
 * Copies the entries into row-major `re`/`im` buffers of `dim * dim` doubles.
 *
 * # Safety
 * `m` must be a live handle and both buffers large enough.
 */
enum AmStatus am_matrix_copy(const struct AmMatrix *m, double *re, double *im);

/**
 * Static metric `Σ wₙ |Ψⁿ⟩⟨Ψⁿ|` of a diagonalizable `h` with real spectrum.
 * `weights` may be NULL (all ones) or point to `dim` positive doubles.
 *
 * # Safety
 * Pointers must be valid as described.
 */
enum AmStatus am_static_metric(const struct AmMatrix *h,
                               const double *weights,
                               struct AmMatrix **out);

/**
 * `‖h†Θ − Θh‖` (Frobenius).
 *
 * # Safety
 * Pointers must be valid.
 */
enum AmStatus am_quasi_hermiticity_residual(const struct AmMatrix *h,
                                            const struct AmMatrix *theta,
                                            double *out);

/**
 * Evolves `theta0` under a schedule given as JSON (the `schedule` object of
 * the CLI configuration), sampling `samples + 1` uniform times on `[t0, t1]`.
 *
 * # Safety
 * `schedule_json` must be a nul-terminated UTF-8 string; other pointers valid.
 */
enum AmStatus am_evolve(const char *schedule_json,
                        const struct AmMatrix *theta0,
                        double t0,
                        double t1,
                        size_t samples,
                        enum AmSolver solver,
                        struct AmTrajectory **out);

/**
 * Number of samples, or 0 for NULL.
 *
 * # Safety
 * `t` must be NULL or a live handle.
 */
size_t am_trajectory_len(const struct AmTrajectory *t);

/**
 * Time and a fresh copy of the metric at sample `index`. `metric` may be NULL
 * when only the time is wanted.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AmStatus am_trajectory_sample(const struct AmTrajectory *t,
                                   size_t index,
                                   double *time,
                                   struct AmMatrix **metric);

/**
 * # Safety
 * `t` must come from this library and not be used afterwards.
 */
void am_trajectory_free(struct AmTrajectory *t);

/**
 * Static two-level metric components `(ϑ₀, ϑ₁, ϑ₂, ϑ₃)` for
 * `H = (v_μ + i w_μ)σ_μ / 2` on the branch `(theta0, alpha)`.
 *
 * # Safety
 * `v`, `w` and `out` must each point to 4 doubles.
 */
enum AmStatus am_two_level_static(const double *v,
                                  const double *w,
                                  double theta0,
                                  double alpha,
                                  double *out);

/**
 * Deviation from the final static metric after the two-level ramp
 * `v₁ = a t/T`, `v₂ = a(T−t)/T`, `w₃` fixed (default settings otherwise).
 *
 * # Safety
 * `out` must be valid.
 */
enum AmStatus am_ramp_deviation(double duration, double amplitude, double w3, double *out);

/**
 * Adiabatic S-matrix for `H₀ + e^{−ε|t|}H_I` with initial metric `theta0`
 * (NULL for the identity). `unitarity_defect` may be NULL.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AmStatus am_s_matrix(const struct AmMatrix *h0,
                          const struct AmMatrix *interaction,
                          double epsilon,
                          const struct AmMatrix *theta0,
                          struct AmMatrix **s_out,
                          double *unitarity_defect);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADIAMETRIC_H */
