#ifndef EGONET_H
#define EGONET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EgonetStatus {
  EGONET_STATUS_OK = 0,
  EGONET_STATUS_INVALID_ARGUMENT = 1,
  EGONET_STATUS_UNDEFINED_AUC = 2,
  EGONET_STATUS_NUMERICAL = 3,
  EGONET_STATUS_PARSE = 4,
  EGONET_STATUS_IO = 5,
  EGONET_STATUS_CONFIG = 6,
  EGONET_STATUS_NULL_POINTER = 7,
  EGONET_STATUS_PANIC = 8,
} EgonetStatus;

typedef enum EgonetEstimator {
  EGONET_ESTIMATOR_LE = 0,
  EGONET_ESTIMATOR_SE = 1,
  EGONET_ESTIMATOR_LE_PLUS = 2,
} EgonetEstimator;

// Observed rows of an egocentric sample.
typedef struct EgonetEgoView EgonetEgoView;

// Dense real matrix.
typedef struct EgonetMatrix EgonetMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null if none. The
// pointer stays valid until the next failing call on the same thread.
const char *egonet_last_error_message(void);

// Copies `rows * cols` row-major values into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` doubles; `out` must be writable.
enum EgonetStatus egonet_matrix_new(size_t rows,
                                    size_t cols,
                                    const double *data,
                                    struct EgonetMatrix **out);

// # Safety
// `m` must come from this library and not be used afterwards. Null is a no-op.
void egonet_matrix_free(struct EgonetMatrix *m);

// # Safety
// `m` must be a live handle or null (which yields 0).
size_t egonet_matrix_rows(const struct EgonetMatrix *m);

// # Safety
// `m` must be a live handle or null (which yields 0).
size_t egonet_matrix_cols(const struct EgonetMatrix *m);

// # Safety
// `m` must be a live handle; `out` must be writable.
enum EgonetStatus egonet_matrix_get(const struct EgonetMatrix *m,
                                    size_t row,
                                    size_t col,
                                    double *out);

// Writes all entries row-major into `buffer`, which holds `len` doubles.
//
// # Safety
// `m` must be a live handle; `buffer` must be writable for `len` doubles.
enum EgonetStatus egonet_matrix_copy(const struct EgonetMatrix *m, double *buffer, size_t len);

// Ego view whose observed nodes are `0..n`, from `a11` (n x n) and `a12`
// (n x (N - n)).
//
// # Safety
// Handles must be live; `out` must be writable.
enum EgonetStatus egonet_ego_view_from_blocks(const struct EgonetMatrix *a11,
                                              const struct EgonetMatrix *a12,
                                              struct EgonetEgoView **out);

// Ego view of a full 0/1 adjacency matrix with the given observed nodes.
//
// # Safety
// `adjacency` must be live; `observed` must hold `n_observed` indices.
enum EgonetStatus egonet_ego_view_from_adjacency(const struct EgonetMatrix *adjacency,
                                                 const size_t *observed,
                                                 size_t n_observed,
                                                 struct EgonetEgoView **out);

// # Safety
// `v` must come from this library and not be used afterwards. Null is a no-op.
void egonet_ego_view_free(struct EgonetEgoView *v);

// # Safety
// `v` must be a live handle or null (which yields 0).
size_t egonet_ego_view_n_observed(const struct EgonetEgoView *v);

// # Safety
// `v` must be a live handle or null (which yields 0).
size_t egonet_ego_view_n_hidden(const struct EgonetEgoView *v);

// Estimated hidden block ((N - n) x (N - n)), rows and columns in ascending
// node order. `estimator` is an `EgonetEstimator` value.
//
// # Safety
// `view` must be live; `out` must be writable.
enum EgonetStatus egonet_impute(const struct EgonetEgoView *view,
                                int32_t estimator,
                                size_t rank,
                                bool truncate,
                                struct EgonetMatrix **out);

// # Safety
// See [`egonet_impute`].
enum EgonetStatus egonet_le_impute(const struct EgonetEgoView *view,
                                   size_t rank,
                                   bool truncate,
                                   struct EgonetMatrix **out);

// # Safety
// See [`egonet_impute`].
enum EgonetStatus egonet_se_impute(const struct EgonetEgoView *view,
                                   size_t rank,
                                   bool truncate,
                                   struct EgonetMatrix **out);

// # Safety
// See [`egonet_impute`].
enum EgonetStatus egonet_le_plus_impute(const struct EgonetEgoView *view,
                                        size_t rank,
                                        bool truncate,
                                        struct EgonetMatrix **out);

// Full N x N estimate in original node order.
//
// # Safety
// `view` must be live; `out` must be writable.
enum EgonetStatus egonet_recover_full(const struct EgonetEgoView *view,
                                      size_t rank,
                                      bool truncate,
                                      struct EgonetMatrix **out);

// Mean squared error over all entries.
//
// # Safety
// Handles must be live; `out` must be writable.
enum EgonetStatus egonet_mse(const struct EgonetMatrix *estimate,
                             const struct EgonetMatrix *truth,
                             double *out);

// Link-prediction AUC over the strict upper triangle of square blocks.
//
// # Safety
// Handles must be live; `out` must be writable.
enum EgonetStatus egonet_auc(const struct EgonetMatrix *scores,
                             const struct EgonetMatrix *truth,
                             double *out);

// Cross-validated rank among `candidates`.
//
// # Safety
// `view` must be live; `candidates` must hold `n_candidates` values; `out`
// must be writable.
enum EgonetStatus egonet_select_rank(const struct EgonetEgoView *view,
                                     const size_t *candidates,
                                     size_t n_candidates,
                                     double holdout_fraction,
                                     size_t repeats,
                                     int32_t estimator,
                                     uint64_t seed,
                                     size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EGONET_H */
