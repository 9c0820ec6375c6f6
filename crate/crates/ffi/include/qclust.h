#ifndef QCLUST_H
#define QCLUST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument or configuration (k, shots, out-of-range angles, ...).
   */
  QC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed input data (non-finite values, wrong shape, ...).
   */
  QC_STATUS_DATA_ERROR = 3,
  /**
   * A metric is undefined for the given partition.
   */
  QC_STATUS_METRIC_UNDEFINED = 4,
  /**
   * Caller-provided output buffer is too small.
   */
  QC_STATUS_BUFFER_TOO_SMALL = 5,
  QC_STATUS_INTERNAL = 70,
} QcStatus;

typedef enum QcMeasure {
  QC_MEASURE_EUCLIDEAN = 0,
  QC_MEASURE_SWAP_TEST = 1,
  QC_MEASURE_QUANTUM_KERNEL = 2,
} QcMeasure;

/**
 * Opaque row-major dataset.
 */
typedef struct QcDataset QcDataset;

/**
 * Opaque clustering result.
 */
typedef struct QcResult QcResult;

/**
 * Options for [`qc_kmeans`]; start from [`qc_kmeans_options_default`].
 */
typedef struct QcKMeansOptions {
  size_t k;
  size_t max_iter;
  double tol;
  uint64_t seed;
  enum QcMeasure measure;
  /**
   * 0 evaluates fidelities exactly.
   */
  uint64_t shots;
  /**
   * Independent restarts; the best is kept. 0 is treated as 1.
   */
  size_t restarts;
} QcKMeansOptions;

typedef struct QcMetrics {
  double silhouette;
  double davies_bouldin;
  double calinski_harabasz;
} QcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL.
 */
const char *qc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qc_version(void);

/**
 * Copies `rows * cols` row-major values into a new dataset.
 *
 * # Safety
 * `values` must point to `rows * cols` readable doubles; `out` must be a
 * valid pointer.
 */
enum QcStatus qc_dataset_new(const double *values,
                             size_t rows,
                             size_t cols,
                             struct QcDataset **out);

/**
 * # Safety
 * `dataset` must be NULL or a handle from [`qc_dataset_new`] not yet freed.
 */
void qc_dataset_free(struct QcDataset *dataset);

/**
 * # Safety
 * `dataset` must be a live handle.
 */
size_t qc_dataset_rows(const struct QcDataset *dataset);

/**
 * # Safety
 * `dataset` must be a live handle.
 */
size_t qc_dataset_cols(const struct QcDataset *dataset);

/**
 * Euclidean, exact, k = 2, 300 iterations, tolerance 1e-6, one restart.
 */
struct QcKMeansOptions qc_kmeans_options_default(void);

/**
 * Clusters `dataset`. Quantum measures expect features in `[0, pi]`.
 *
 * # Safety
 * `dataset` must be a live handle, `options` and `out` valid pointers.
 */
enum QcStatus qc_kmeans(const struct QcDataset *dataset,
                        const struct QcKMeansOptions *options,
                        struct QcResult **out);

/**
 * # Safety
 * `result` must be NULL or a handle from [`qc_kmeans`] not yet freed.
 */
void qc_result_free(struct QcResult *result);

/**
 * Number of clusters.
 *
 * # Safety
 * `result` must be a live handle.
 */
size_t qc_result_k(const struct QcResult *result);

/**
 * Number of assigned points.
 *
 * # Safety
 * `result` must be a live handle.
 */
size_t qc_result_len(const struct QcResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
size_t qc_result_iterations(const struct QcResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
bool qc_result_converged(const struct QcResult *result);

/**
 * Copies the cluster index of every point into `out[0..len]`.
 *
 * # Safety
 * `result` must be a live handle and `out` writable for `capacity` elements.
 */
enum QcStatus qc_result_assignments(const struct QcResult *result, size_t *out, size_t capacity);

/**
 * Copies the `k x cols` row-major centroid matrix into `out`.
 *
 * # Safety
 * `result` must be a live handle and `out` writable for `capacity` elements.
 */
enum QcStatus qc_result_centroids(const struct QcResult *result, double *out, size_t capacity);

/**
 * Swap-test fidelity of two angle vectors of length `n`; `shots == 0`
 * gives the exact value.
 *
 * # Safety
 * `x` and `c` must point to `n` doubles; `out` must be valid.
 */
enum QcStatus qc_swap_test_fidelity(const double *x,
                                    const double *c,
                                    size_t n,
                                    uint64_t shots,
                                    uint64_t seed,
                                    double *out);

/**
 * Kernel-circuit fidelity (all-zeros readout) of two angle vectors.
 *
 * # Safety
 * `x` and `c` must point to `n` doubles; `out` must be valid.
 */
enum QcStatus qc_kernel_fidelity(const double *x,
                                 const double *c,
                                 size_t n,
                                 uint64_t shots,
                                 uint64_t seed,
                                 double *out);

/**
 * Silhouette, Davies–Bouldin and Calinski–Harabasz scores of a labelling.
 *
 * # Safety
 * `dataset` must be a live handle, `assignments` must point to `len`
 * values and `out` must be valid.
 */
enum QcStatus qc_evaluate(const struct QcDataset *dataset,
                          const size_t *assignments,
                          size_t len,
                          struct QcMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCLUST_H */
