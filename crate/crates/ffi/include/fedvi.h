#ifndef FEDVI_H
#define FEDVI_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Synthetic problem families.
 */
typedef enum FedviProblemKind {
  FEDVI_PROBLEM_KIND_AFFINE = 0,
  FEDVI_PROBLEM_KIND_BILINEAR_SADDLE = 1,
  FEDVI_PROBLEM_KIND_SKEW = 2,
  FEDVI_PROBLEM_KIND_QUADRATIC_GRADIENT = 3,
  FEDVI_PROBLEM_KIND_BOUNDED_NONLINEAR = 4,
  FEDVI_PROBLEM_KIND_REGULARIZED = 5,
} FedviProblemKind;

/**
 * Result code of every exported function.
 */
typedef enum FedviStatus {
  FEDVI_STATUS_OK = 0,
  FEDVI_STATUS_NULL_POINTER = 1,
  FEDVI_STATUS_INVALID_ARGUMENT = 2,
  FEDVI_STATUS_DIMENSION_MISMATCH = 3,
  FEDVI_STATUS_CONFIG_REJECTED = 4,
  FEDVI_STATUS_IO = 5,
  FEDVI_STATUS_INTERNAL = 6,
} FedviStatus;

/**
 * Opaque operator handle.
 */
typedef struct FedviOperator FedviOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *fedvi_last_error(void);

/**
 * Build a synthetic test problem. `params_json` may be null for defaults.
 *
 * # Safety
 * `params_json` is null or a NUL-terminated string; `out` is writable.
 */
enum FedviStatus fedvi_operator_from_problem(enum FedviProblemKind kind,
                                             size_t dim,
                                             uint64_t seed,
                                             const char *params_json,
                                             struct FedviOperator **out);

/**
 * Affine operator `V(z) = A z + b` with `A` given row-major.
 *
 * # Safety
 * `a` holds `dim*dim` values, `b` holds `dim` values, `out` is writable.
 */
enum FedviStatus fedvi_operator_affine(size_t dim,
                                       const double *a,
                                       const double *b,
                                       struct FedviOperator **out);

/**
 * Load an affine operator from the plain-text matrix format.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum FedviStatus fedvi_operator_load(const char *path, struct FedviOperator **out);

/**
 * # Safety
 * `op` is null or a live handle.
 */
void fedvi_operator_free(struct FedviOperator *op);

/**
 * Dimension of the operator, or 0 for a null handle.
 *
 * # Safety
 * `op` is null or a live handle.
 */
size_t fedvi_operator_dim(const struct FedviOperator *op);

/**
 * Declared smoothness constant `L` (may be infinite).
 *
 * # Safety
 * `op` is a live handle; `out` is writable.
 */
enum FedviStatus fedvi_operator_lipschitz(const struct FedviOperator *op, double *out);

/**
 * Evaluate `V(z)` into `out`; both buffers hold `len` values.
 *
 * # Safety
 * `op` is a live handle; `z` and `out` hold `len` values.
 */
enum FedviStatus fedvi_operator_eval(const struct FedviOperator *op,
                                     const double *z,
                                     size_t len,
                                     double *out);

/**
 * Restricted gap of `x_o` over the ball of `radius` around `center`, with
 * the automatic evaluator. `certified` reports whether the value is exact.
 *
 * # Safety
 * `op` is a live handle; `x_o` and `center` hold `len` values; `value` and
 * `certified` are writable.
 */
enum FedviStatus fedvi_restricted_gap(const struct FedviOperator *op,
                                      const double *x_o,
                                      const double *center,
                                      size_t len,
                                      double radius,
                                      double *value,
                                      bool *certified);

/**
 * Run an experiment described by a JSON config and return its CSV text in
 * `out_csv` (free with [`fedvi_string_free`]). `workers` of 0 uses all cores.
 *
 * # Safety
 * `config_json` is a NUL-terminated string; `out_csv` is writable.
 */
enum FedviStatus fedvi_run_experiment(const char *config_json, size_t workers, char **out_csv);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void fedvi_string_free(char *s);

/**
 * Least-squares fit of `log y = intercept + slope · log x`.
 *
 * # Safety
 * `xs` and `ys` hold `n` values; the three outputs are writable.
 */
enum FedviStatus fedvi_fit_power_law(const double *xs,
                                     const double *ys,
                                     size_t n,
                                     double *slope,
                                     double *intercept,
                                     double *r_squared);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEDVI_H */
