#ifndef PQCIRCLE_H
#define PQCIRCLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Built-in functions on `[0, 1]`.
 */
typedef enum PqFunction {
  PQ_FUNCTION_IDENTITY = 0,
  PQ_FUNCTION_SQUARE = 1,
  PQ_FUNCTION_CUBE = 2,
  PQ_FUNCTION_CANTOR = 3,
} PqFunction;

typedef enum PqSearchMode {
  PQ_SEARCH_MODE_MEAN = 0,
  PQ_SEARCH_MODE_ALTERNATE = 1,
} PqSearchMode;

typedef enum PqStatus {
  PQ_STATUS_OK = 0,
  PQ_STATUS_NULL_POINTER = 1,
  PQ_STATUS_INVALID_ARGUMENT = 2,
  PQ_STATUS_PRECISION_EXHAUSTED = 3,
  PQ_STATUS_BUFFER_TOO_SMALL = 4,
  PQ_STATUS_PANIC = 5,
} PqStatus;

typedef struct PqAtomicMeasure PqAtomicMeasure;

typedef struct PqFixpointTrace PqFixpointTrace;

typedef struct PqGridFunction PqGridFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *pq_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pq_version(void);

/**
 * Succeeds iff `p, q ≥ 2` are not powers of a common integer.
 */
enum PqStatus pq_check_pair(uint64_t p, uint64_t q);

/**
 * Cantor function at `num/den ∈ [0, 1]`. `*exact` is set when the value
 * was resolved exactly rather than bracketed.
 *
 * # Safety
 * `value` and `exact` must be valid for writes.
 */
enum PqStatus pq_cantor(uint64_t num, uint64_t den, double *value, bool *exact);

/**
 * Normalized Weyl sum `(1/N²) Σ e(k p^i q^j x)` over `0 ≤ i, j < side`
 * for the rational base `x = num/den`, computed with exact phases.
 *
 * # Safety
 * `re` and `im` must be valid for writes.
 */
enum PqStatus pq_weyl_sum_square(int64_t num,
                                 uint64_t den,
                                 uint64_t p,
                                 uint64_t q,
                                 size_t side,
                                 int64_t k,
                                 double *re,
                                 double *im);

/**
 * Ergodic atomic measure through the orbit of `num/den`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PqStatus pq_atomic_measure_new(int64_t num,
                                    uint64_t den,
                                    uint64_t p,
                                    uint64_t q,
                                    struct PqAtomicMeasure **out);

/**
 * # Safety
 * `m` must come from [`pq_atomic_measure_new`] and not be used afterwards.
 */
void pq_atomic_measure_free(struct PqAtomicMeasure *m);

/**
 * Denominator `s` of the atoms `j/s`, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
uint64_t pq_atomic_measure_modulus(const struct PqAtomicMeasure *m);

/**
 * Number of atoms, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t pq_atomic_measure_support_len(const struct PqAtomicMeasure *m);

/**
 * Writes the atom residues `j` in increasing order.
 *
 * # Safety
 * `m` must be a live handle and `buf` valid for `len` writes.
 */
enum PqStatus pq_atomic_measure_support(const struct PqAtomicMeasure *m, uint64_t *buf, size_t len);

/**
 * `μ(z^k)`.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` valid for writes.
 */
enum PqStatus pq_atomic_measure_moment(const struct PqAtomicMeasure *m,
                                       int64_t k,
                                       double *re,
                                       double *im);

/**
 * Sets `*invariant` to whether the image under `×n` equals the measure.
 *
 * # Safety
 * `m` must be a live handle and `invariant` valid for writes.
 */
enum PqStatus pq_atomic_measure_is_invariant(const struct PqAtomicMeasure *m,
                                             uint64_t n,
                                             bool *invariant);

/**
 * Grid function from `len ≥ 2` samples at `t/(len-1)`.
 *
 * # Safety
 * `samples` must be valid for `len` reads and `out` for writes.
 */
enum PqStatus pq_grid_function_new(const double *samples, size_t len, struct PqGridFunction **out);

/**
 * A built-in function sampled at `t/k`, `t = 0..=k`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PqStatus pq_grid_function_sample(enum PqFunction kind, size_t k, struct PqGridFunction **out);

/**
 * `T_n f` for a built-in `f`, sampled at `t/k`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PqStatus pq_apply_tn(enum PqFunction kind, uint64_t n, size_t k, struct PqGridFunction **out);

/**
 * # Safety
 * `f` must come from this library and not be used afterwards.
 */
void pq_grid_function_free(struct PqGridFunction *f);

/**
 * Number of samples (`k + 1`), or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
size_t pq_grid_function_len(const struct PqGridFunction *f);

/**
 * # Safety
 * `f` must be a live handle and `buf` valid for `len` writes.
 */
enum PqStatus pq_grid_function_samples(const struct PqGridFunction *f, double *buf, size_t len);

/**
 * Projected fixed-point search for `T_p` and `T_q` from `f0`.
 *
 * # Safety
 * `f0` must be a live handle and `out` valid for writes.
 */
enum PqStatus pq_fixpoint_search(const struct PqGridFunction *f0,
                                 uint64_t p,
                                 uint64_t q,
                                 size_t iters,
                                 double tol,
                                 enum PqSearchMode mode,
                                 struct PqFixpointTrace **out);

/**
 * # Safety
 * `t` must come from [`pq_fixpoint_search`] and not be used afterwards.
 */
void pq_fixpoint_trace_free(struct PqFixpointTrace *t);

/**
 * Number of recorded iterates, including the start; 0 for NULL.
 *
 * # Safety
 * `t` must be NULL or a live handle.
 */
size_t pq_fixpoint_trace_len(const struct PqFixpointTrace *t);

/**
 * # Safety
 * `t` must be a live handle and `buf` valid for `len` writes.
 */
enum PqStatus pq_fixpoint_trace_residuals(const struct PqFixpointTrace *t, double *buf, size_t len);

/**
 * # Safety
 * `t` must be a live handle and `buf` valid for `len` writes.
 */
enum PqStatus pq_fixpoint_trace_distances(const struct PqFixpointTrace *t, double *buf, size_t len);

/**
 * Copy of the last iterate as a new grid function handle.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum PqStatus pq_fixpoint_trace_final(const struct PqFixpointTrace *t, struct PqGridFunction **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PQCIRCLE_H */
