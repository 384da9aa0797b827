#ifndef FAVLAB_H
#define FAVLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum FavStatus {
  FAV_STATUS_OK = 0,
  FAV_STATUS_NULL_POINTER = 1,
  FAV_STATUS_INVALID_INPUT = 2,
  FAV_STATUS_UNKNOWN_PRESET = 3,
  FAV_STATUS_CAP_EXCEEDED = 4,
  FAV_STATUS_NO_CONVERGENCE = 5,
  FAV_STATUS_PARSE = 6,
  FAV_STATUS_NUMERICAL = 7,
  FAV_STATUS_PANIC = 8,
} FavStatus;

/**
 * A piecewise-constant multiplicity function.
 */
typedef struct FavStepFunction FavStepFunction;

/**
 * A similarity system.
 */
typedef struct FavSystem FavSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or NULL. Valid until the next failing call.
 */
const char *fav_last_error_message(void);

/**
 * Builds a preset system (`gasket`, `corner4`, `random-<L>-<seed>`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum FavStatus fav_system_preset(const char *name, struct FavSystem **out);

/**
 * Parses a system file (the JSON written by `favlab gen`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FavStatus fav_system_from_json(const char *json, struct FavSystem **out);

/**
 * # Safety
 * `sys` must come from this library and not be used afterwards. NULL is ignored.
 */
void fav_system_free(struct FavSystem *sys);

/**
 * Number of maps and their common contraction ratio.
 *
 * # Safety
 * `sys` must be a live handle; outputs must be writable.
 */
enum FavStatus fav_system_info(const struct FavSystem *sys, size_t *maps, double *ratio);

/**
 * Favard length of the depth-`n` generation by adaptive quadrature.
 *
 * A result that missed `target_rel_error` is still written, with `converged` set to 0.
 *
 * # Safety
 * `sys` must be a live handle; outputs must be writable.
 */
enum FavStatus fav_favard_length(const struct FavSystem *sys,
                                 size_t n,
                                 size_t grid,
                                 size_t refinements,
                                 double target_rel_error,
                                 double *value,
                                 double *error_estimate,
                                 bool *converged);

/**
 * Monte Carlo estimate; identical for identical `seed` and `trials`.
 *
 * # Safety
 * `sys` must be a live handle; outputs must be writable.
 */
enum FavStatus fav_buffon_estimate(const struct FavSystem *sys,
                                   size_t n,
                                   uint64_t trials,
                                   uint64_t seed,
                                   double *estimate,
                                   double *std_error);

/**
 * Multiplicity function of the depth-`n` projection at angle `theta`, or with
 * `maximal` set, its pointwise maximum over depths `0..=n`.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum FavStatus fav_multiplicity(const struct FavSystem *sys,
                                size_t n,
                                double theta,
                                bool maximal,
                                struct FavStepFunction **out);

/**
 * # Safety
 * `f` must come from this library and not be used afterwards. NULL is ignored.
 */
void fav_step_free(struct FavStepFunction *f);

/**
 * Number of cells (maximal intervals of constant value, zero cells between pieces included).
 *
 * # Safety
 * `f` must be a live handle; `count` must be writable.
 */
enum FavStatus fav_step_cell_count(const struct FavStepFunction *f, size_t *count);

/**
 * Cell `index` as `[lo, hi)` with its value.
 *
 * # Safety
 * `f` must be a live handle; outputs must be writable.
 */
enum FavStatus fav_step_cell(const struct FavStepFunction *f,
                             size_t index,
                             double *lo,
                             double *hi,
                             uint32_t *value);

/**
 * Integral, support measure, `|{f >= k}|` for the given `k`, and `∫ f²`.
 *
 * # Safety
 * `f` must be a live handle; outputs must be writable.
 */
enum FavStatus fav_step_stats(const struct FavStepFunction *f,
                              uint32_t k,
                              double *mass,
                              double *support,
                              double *level,
                              double *l2);

/**
 * Fourier transform of the depth-`n` projected measure at frequency `x`.
 *
 * # Safety
 * `sys` must be a live handle; outputs must be writable.
 */
enum FavStatus fav_nu_hat(const struct FavSystem *sys,
                          double theta,
                          size_t n,
                          double x,
                          double *re,
                          double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAVLAB_H */
