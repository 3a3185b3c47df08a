#ifndef MPKRYLOV_H
#define MPKRYLOV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MpkSelection {
  MPK_SELECTION_LIN_COMB = 0,
  MPK_SELECTION_COLUMNS = 1,
  MPK_SELECTION_RANDOM_COLUMNS = 2,
} MpkSelection;

/**
 * Result code of every fallible call.
 */
typedef enum MpkStatus {
  MPK_STATUS_OK = 0,
  MPK_STATUS_NULL_POINTER = 1,
  MPK_STATUS_INVALID_ARGUMENT = 2,
  MPK_STATUS_DIMENSION_MISMATCH = 3,
  MPK_STATUS_SETUP_FAILED = 4,
  MPK_STATUS_PARSE_ERROR = 5,
  MPK_STATUS_IO_ERROR = 6,
  MPK_STATUS_BLOCK_CAP_EXCEEDED = 7,
  MPK_STATUS_INTERNAL = 8,
  MPK_STATUS_PANIC = 9,
} MpkStatus;

typedef enum MpkVariant {
  MPK_VARIANT_GMRES = 0,
  MPK_VARIANT_FGMRES = 1,
  MPK_VARIANT_FGMRES_CYCLIC = 2,
  MPK_VARIANT_MPGMRES_COMPLETE = 3,
  MPK_VARIANT_MPGMRES_SELECTIVE = 4,
} MpkVariant;

typedef struct MpkMatrix MpkMatrix;

typedef struct MpkPreconditioner MpkPreconditioner;

typedef struct MpkReport MpkReport;

/**
 * Solver settings. Start from [`mpk_config_default`]; pointer fields may be
 * null, meaning equal weights, `selectors[i] = i` and forward ordering.
 */
typedef struct MpkSolverConfig {
  enum MpkVariant variant;
  double tol;
  size_t maxit;
  enum MpkSelection selection;
  /**
   * Zero-based column per preconditioner for `Columns`.
   */
  const size_t *selectors;
  size_t num_selectors;
  /**
   * Seed for `RandomColumns`.
   */
  uint64_t seed;
  /**
   * One weight per preconditioner, in the configured ordering.
   */
  const double *alpha;
  size_t num_alpha;
  /**
   * Zero-based permutation of preconditioner indices.
   */
  const size_t *ordering;
  size_t num_ordering;
  double deflate_tol;
  size_t max_block_columns;
  bool parallel;
} MpkSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *mpk_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mpk_version(void);

/**
 * Builds a matrix from zero-based CSR arrays. `row_offsets` has `n + 1`
 * entries; `col_indices` and `values` have `row_offsets[n]`.
 *
 * # Safety
 * The arrays must be readable for the lengths above.
 */
enum MpkStatus mpk_matrix_from_csr(size_t n,
                                   const size_t *row_offsets,
                                   const size_t *col_indices,
                                   const double *values,
                                   struct MpkMatrix **out);

/**
 * Reads a Matrix Market coordinate file.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum MpkStatus mpk_matrix_read_mtx(const char *path, struct MpkMatrix **out);

/**
 * Generates a model problem matrix from a spec such as
 * `convdiff:grid=32,eps=0.01`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string.
 */
enum MpkStatus mpk_matrix_generate(const char *spec, struct MpkMatrix **out);

/**
 * Writes the right-hand side of a generated problem into `rhs`, which must
 * have the problem dimension.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `rhs` writable for `len` values.
 */
enum MpkStatus mpk_problem_rhs(const char *spec, double *rhs, size_t len);

/**
 * # Safety
 * `matrix` must be null or a handle from this library not yet freed.
 */
void mpk_matrix_free(struct MpkMatrix *matrix);

/**
 * Dimension of the matrix, or 0 for a null handle.
 *
 * # Safety
 * `matrix` must be null or a live handle.
 */
size_t mpk_matrix_dim(const struct MpkMatrix *matrix);

/**
 * Stored entries of the matrix, or 0 for a null handle.
 *
 * # Safety
 * `matrix` must be null or a live handle.
 */
size_t mpk_matrix_nnz(const struct MpkMatrix *matrix);

/**
 * `y = A x`.
 *
 * # Safety
 * `x` must be readable and `y` writable for `len` values.
 */
enum MpkStatus mpk_matrix_spmv(const struct MpkMatrix *matrix,
                               const double *x,
                               double *y,
                               size_t len);

/**
 * Sets up a preconditioner for `matrix` from a spec such as `ilu0`,
 * `ssor:omega=1.2` or `badscale:gamma=100`.
 *
 * # Safety
 * `matrix` must be a live handle and `spec` a NUL-terminated string.
 */
enum MpkStatus mpk_precond_new(const struct MpkMatrix *matrix,
                               const char *spec,
                               struct MpkPreconditioner **out);

/**
 * `out = P^{-1} v`.
 *
 * # Safety
 * `v` must be readable and `out` writable for `len` values.
 */
enum MpkStatus mpk_precond_apply(const struct MpkPreconditioner *precond,
                                 const double *v,
                                 double *out,
                                 size_t len);

/**
 * # Safety
 * `precond` must be null or a handle from this library not yet freed.
 */
void mpk_precond_free(struct MpkPreconditioner *precond);

/**
 * Library defaults for `variant`: tol 1e-8, maxit 200, lincomb selection.
 */
struct MpkSolverConfig mpk_config_default(enum MpkVariant variant);

/**
 * Solves `A x = b`. `x0` may be null for a zero initial guess. On success
 * `*out` receives a report to release with [`mpk_report_free`]; reaching
 * `maxit` without converging is still a success.
 *
 * # Safety
 * `b` (and `x0` when non-null) must be readable for `n` values and
 * `preconds` for `num_preconds` live handles.
 */
enum MpkStatus mpk_solve(const struct MpkMatrix *matrix,
                         const double *b,
                         const double *x0,
                         size_t n,
                         const struct MpkPreconditioner *const *preconds,
                         size_t num_preconds,
                         const struct MpkSolverConfig *config,
                         struct MpkReport **out);

/**
 * # Safety
 * `report` must be null or a handle from this library not yet freed.
 */
void mpk_report_free(struct MpkReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
bool mpk_report_converged(const struct MpkReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
size_t mpk_report_iterations(const struct MpkReport *report);

/**
 * Least-squares estimate of the final relative residual; NaN for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double mpk_report_final_residual(const struct MpkReport *report);

/**
 * Relative residual recomputed from the solution; NaN for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double mpk_report_true_residual(const struct MpkReport *report);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
size_t mpk_report_num_deflations(const struct MpkReport *report);

/**
 * Entries in the residual history: iterations plus one.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t mpk_report_history_len(const struct MpkReport *report);

/**
 * Copies the relative residual history; `len` must equal
 * [`mpk_report_history_len`].
 *
 * # Safety
 * `out` must be writable for `len` values.
 */
enum MpkStatus mpk_report_history(const struct MpkReport *report, double *out, size_t len);

/**
 * Copies the solution; `len` must equal the matrix dimension.
 *
 * # Safety
 * `out` must be writable for `len` values.
 */
enum MpkStatus mpk_report_solution(const struct MpkReport *report, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPKRYLOV_H */
