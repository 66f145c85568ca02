/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef L1PCA_H
#define L1PCA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum L1pcaSolverKind {
  L1PCA_SOLVER_KIND_L1BF = 0,
  L1PCA_SOLVER_KIND_FIXED_POINT = 1,
  L1PCA_SOLVER_KIND_ALT_OPT = 2,
  L1PCA_SOLVER_KIND_ORACLE = 3,
} L1pcaSolverKind;

typedef enum L1pcaInit {
  /**
   * Random for the fixed-point solver, sv-sign otherwise.
   */
  L1PCA_INIT_DEFAULT = 0,
  L1PCA_INIT_SV_SIGN = 1,
  L1PCA_INIT_RANDOM = 2,
} L1pcaInit;

typedef enum L1pcaStatus {
  L1PCA_STATUS_OK = 0,
  L1PCA_STATUS_NULL_POINTER = 1,
  L1PCA_STATUS_INVALID_INPUT = 2,
  L1PCA_STATUS_PRECONDITION = 3,
  L1PCA_STATUS_NUMERICAL = 4,
  L1PCA_STATUS_PANIC = 5,
  L1PCA_STATUS_BUFFER_TOO_SMALL = 6,
} L1pcaStatus;

typedef struct L1pcaMatrix L1pcaMatrix;

typedef struct L1pcaResult L1pcaResult;

typedef struct L1pcaConfig {
  enum L1pcaSolverKind solver;
  enum L1pcaInit init;
  size_t k;
  size_t restarts;
  /**
   * 0 selects the solver default.
   */
  size_t flip_budget;
  /**
   * Negative or NaN selects the solver default.
   */
  double tol;
  uint64_t seed;
} L1pcaConfig;

typedef struct L1pcaResultInfo {
  size_t dim;
  size_t samples;
  size_t k;
  double l1_metric;
  /**
   * `|Xb|_2` for K = 1, `|XB|_*` otherwise.
   */
  double objective;
  size_t flips;
  size_t restart_winner;
  bool converged;
  bool basis_completed;
} L1pcaResultInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default configuration: L1-BF, K = 1, one start, seed 0.
 */
struct L1pcaConfig l1pca_config_default(void);

/**
 * Null-terminated message of the last failure on this thread, or an empty
 * string. Valid until the next failing call on the same thread.
 */
const char *l1pca_last_error_message(void);

/**
 * Copies a `rows x cols` row-major buffer into a new matrix handle.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles and `out` to a
 * writable handle slot.
 */
enum L1pcaStatus l1pca_matrix_new(const double *data,
                                  size_t rows,
                                  size_t cols,
                                  struct L1pcaMatrix **out);

/**
 * # Safety
 * `matrix` must be null or a handle from [`l1pca_matrix_new`] not yet freed.
 */
void l1pca_matrix_free(struct L1pcaMatrix *matrix);

/**
 * Numerical rank of the matrix.
 *
 * # Safety
 * `matrix` must be a live handle and `rank` writable.
 */
enum L1pcaStatus l1pca_matrix_rank(const struct L1pcaMatrix *matrix, size_t *rank);

/**
 * Runs the configured solver; on success `*out` owns a new result.
 *
 * # Safety
 * `matrix` must be a live handle, `config` readable (or null for the
 * defaults) and `out` writable.
 */
enum L1pcaStatus l1pca_solve(const struct L1pcaMatrix *matrix,
                             const struct L1pcaConfig *config,
                             struct L1pcaResult **out);

/**
 * # Safety
 * `result` must be null or a handle from [`l1pca_solve`] not yet freed.
 */
void l1pca_result_free(struct L1pcaResult *result);

/**
 * # Safety
 * `result` must be a live handle and `info` writable.
 */
enum L1pcaStatus l1pca_result_info(const struct L1pcaResult *result, struct L1pcaResultInfo *info);

/**
 * Copies the `dim x k` basis, row-major, into `buf` of `len` doubles.
 *
 * # Safety
 * `result` must be a live handle and `buf` writable for `len` doubles.
 */
enum L1pcaStatus l1pca_result_basis(const struct L1pcaResult *result, double *buf, size_t len);

/**
 * Copies the `samples x k` sign matrix, row-major, into `buf`.
 *
 * # Safety
 * `result` must be a live handle and `buf` writable for `len` bytes.
 */
enum L1pcaStatus l1pca_result_signs(const struct L1pcaResult *result, int8_t *buf, size_t len);

/**
 * Sum of singular values of a row-major `rows x cols` buffer.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles and `out` be writable.
 */
enum L1pcaStatus l1pca_nuclear_norm(const double *data, size_t rows, size_t cols, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* L1PCA_H */
