#ifndef MHSBM_H
#define MHSBM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MhsbmStatus {
  MHSBM_STATUS_OK = 0,
  MHSBM_STATUS_NULL_POINTER = 1,
  MHSBM_STATUS_INVALID_ARGUMENT = 2,
  MHSBM_STATUS_IO = 3,
  MHSBM_STATUS_PARSE = 4,
  MHSBM_STATUS_DIMENSION_MISMATCH = 5,
  MHSBM_STATUS_FIT_FAILED = 6,
  MHSBM_STATUS_PANIC = 7,
} MhsbmStatus;

/**
 * Which fitted matrix to read.
 */
typedef enum MhsbmMatrix {
  /**
   * `u` of a layer (nodes x communities).
   */
  MHSBM_MATRIX_MEMBERSHIP = 0,
  /**
   * `w` of a layer.
   */
  MHSBM_MATRIX_AFFINITY = 1,
  /**
   * Cross affinity of an inter-edge set, by set index.
   */
  MHSBM_MATRIX_CROSS_AFFINITY = 2,
} MhsbmMatrix;

/**
 * A fitted model.
 */
typedef struct MhsbmFit MhsbmFit;

/**
 * A loaded multi-hypergraph.
 */
typedef struct MhsbmGraph MhsbmGraph;

/**
 * Fit settings. Obtain defaults from [`mhsbm_fit_options_default`].
 */
typedef struct MhsbmFitOptions {
  size_t restarts;
  size_t max_iters;
  double tol;
  size_t check_every;
  bool assortative;
  uint64_t seed;
} MhsbmFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *mhsbm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mhsbm_version(void);

/**
 * Loads the layers, ground truth and inter-edges listed in a manifest.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MhsbmStatus mhsbm_graph_load(const char *path, struct MhsbmGraph **out);

/**
 * # Safety
 * `graph` must come from [`mhsbm_graph_load`] or be null.
 */
void mhsbm_graph_free(struct MhsbmGraph *graph);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MhsbmStatus mhsbm_graph_num_layers(const struct MhsbmGraph *graph, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MhsbmStatus mhsbm_graph_num_nodes(const struct MhsbmGraph *graph, size_t layer, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum MhsbmStatus mhsbm_graph_num_hyperedges(const struct MhsbmGraph *graph,
                                            size_t layer,
                                            size_t *out);

struct MhsbmFitOptions mhsbm_fit_options_default(void);

/**
 * Fits the model with `k[l]` communities on layer `l`; a single value
 * applies to every layer. A null `options` uses the defaults.
 *
 * # Safety
 * `k` must hold `k_len` values; other pointers must be valid or null where
 * allowed.
 */
enum MhsbmStatus mhsbm_fit(const struct MhsbmGraph *graph,
                           const size_t *k,
                           size_t k_len,
                           const struct MhsbmFitOptions *options,
                           struct MhsbmFit **out);

/**
 * # Safety
 * `fit` must come from [`mhsbm_fit`] or be null.
 */
void mhsbm_fit_free(struct MhsbmFit *fit);

/**
 * Final objective of the selected restart.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MhsbmStatus mhsbm_fit_objective(const struct MhsbmFit *fit, double *out);

/**
 * Shape of a fitted matrix.
 *
 * # Safety
 * Pointers must be valid.
 */
enum MhsbmStatus mhsbm_fit_matrix_shape(const struct MhsbmFit *fit,
                                        enum MhsbmMatrix which,
                                        size_t index,
                                        size_t *rows,
                                        size_t *cols);

/**
 * Copies a fitted matrix row-major into `buf`, which must hold exactly
 * rows x cols values.
 *
 * # Safety
 * `buf` must be writable for `len` values.
 */
enum MhsbmStatus mhsbm_fit_matrix_copy(const struct MhsbmFit *fit,
                                       enum MhsbmMatrix which,
                                       size_t index,
                                       double *buf,
                                       size_t len);

/**
 * Score of a candidate hyperedge on `layer`: its rate over the number of
 * node pairs, with internal degrees taken from the graph's hyperedges.
 *
 * # Safety
 * `nodes` must hold `len` values; other pointers must be valid.
 */
enum MhsbmStatus mhsbm_score_hyperedge(const struct MhsbmFit *fit,
                                       const struct MhsbmGraph *graph,
                                       size_t layer,
                                       const size_t *nodes,
                                       size_t len,
                                       double *out);

/**
 * Probability that a positive outranks a negative, ties counted half.
 *
 * # Safety
 * Arrays must hold the given number of values.
 */
enum MhsbmStatus mhsbm_auc(const double *pos,
                           size_t n_pos,
                           const double *neg,
                           size_t n_neg,
                           double *out);

/**
 * Normalized mutual information of two hard partitions of `n` nodes.
 *
 * # Safety
 * Arrays must hold `n` values.
 */
enum MhsbmStatus mhsbm_nmi(const size_t *predicted, const size_t *truth, size_t n, double *out);

/**
 * Best-match community F1 averaged over both directions.
 *
 * # Safety
 * Arrays must hold `n` values.
 */
enum MhsbmStatus mhsbm_f1(const size_t *predicted, const size_t *truth, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MHSBM_H */
