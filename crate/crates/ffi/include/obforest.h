#ifndef OBFOREST_H
#define OBFOREST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ObfClassifier {
  /**
   * Axis-parallel random forest.
   */
  OBF_CLASSIFIER_RAF = 0,
  /**
   * Oblique random forest with MPSVM splits.
   */
  OBF_CLASSIFIER_OBRAF_M = 1,
  /**
   * RVFL-routed hybrid of per-class oblique trees.
   */
  OBF_CLASSIFIER_OBRAF_L = 2,
} ObfClassifier;

/**
 * Result of every fallible call. Values 1-3 match the CLI exit codes.
 */
typedef enum ObfStatus {
  OBF_STATUS_OK = 0,
  /**
   * Invalid configuration or parameter value.
   */
  OBF_STATUS_CONFIG = 1,
  /**
   * Unreadable, malformed or inconsistent data, including I/O failures.
   */
  OBF_STATUS_DATA = 2,
  /**
   * A linear-algebra kernel failed.
   */
  OBF_STATUS_NUMERIC = 3,
  /**
   * Null pointer, bad UTF-8 or out-of-range argument.
   */
  OBF_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Internal panic; the library state is still usable.
   */
  OBF_STATUS_PANIC = 5,
} ObfStatus;

/**
 * Labelled feature matrix.
 */
typedef struct ObfDataset ObfDataset;

/**
 * Trained model with its class names.
 */
typedef struct ObfModel ObfModel;

/**
 * Training settings. Start from [`obf_train_options_default`].
 */
typedef struct ObfTrainOptions {
  enum ObfClassifier classifier;
  size_t n_trees;
  /**
   * Negative for unlimited depth.
   */
  int64_t max_depth;
  /**
   * Features sampled per node; 0 for round(sqrt(d)).
   */
  size_t q;
  uint64_t seed;
  /**
   * Worker threads; 0 for the global pool.
   */
  size_t threads;
} ObfTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after a
 * successful call. Valid until the next call on the same thread.
 */
const char *obf_last_error(void);

/**
 * Library version as a static string.
 */
const char *obf_version(void);

struct ObfTrainOptions obf_train_options_default(void);

/**
 * Loads a CSV file. `label_column` is `"last"`, a 0-based index or a
 * header name; null means `"last"`.
 *
 * # Safety
 * `path` and a non-null `label_column` must be NUL-terminated strings;
 * `out` must be writable.
 */
enum ObfStatus obf_dataset_load_csv(const char *path,
                                    const char *label_column,
                                    struct ObfDataset **out);

/**
 * Builds a dataset from a row-major `n_rows × n_features` matrix and labels
 * in `0..num_classes`.
 *
 * # Safety
 * `features` must point to `n_rows * n_features` doubles and `labels` to
 * `n_rows` values; `out` must be writable.
 */
enum ObfStatus obf_dataset_from_arrays(const double *features,
                                       const size_t *labels,
                                       size_t n_rows,
                                       size_t n_features,
                                       size_t num_classes,
                                       struct ObfDataset **out);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t obf_dataset_n_rows(const struct ObfDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t obf_dataset_n_features(const struct ObfDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t obf_dataset_num_classes(const struct ObfDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void obf_dataset_free(struct ObfDataset *dataset);

/**
 * Fits a z-score normalizer on `dataset` and trains a model on the
 * normalized rows. `options` may be null for the defaults.
 *
 * # Safety
 * `dataset` must be a live handle, `options` null or valid, `out` writable.
 */
enum ObfStatus obf_model_train(const struct ObfDataset *dataset,
                               const struct ObfTrainOptions *options,
                               struct ObfModel **out);

/**
 * Predicts class indices for a row-major `n_rows × n_features` matrix of
 * raw features, writing `n_rows` values to `out_labels`.
 *
 * # Safety
 * `features` must point to `n_rows * n_features` doubles and `out_labels`
 * to room for `n_rows` values.
 */
enum ObfStatus obf_model_predict(const struct ObfModel *model,
                                 const double *features,
                                 size_t n_rows,
                                 size_t n_features,
                                 size_t *out_labels);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum ObfStatus obf_model_save(const struct ObfModel *model, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum ObfStatus obf_model_load(const char *path, struct ObfModel **out);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
size_t obf_model_n_features(const struct ObfModel *model);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
size_t obf_model_num_classes(const struct ObfModel *model);

/**
 * Mean node count per tree; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
double obf_model_mean_nodes(const struct ObfModel *model);

/**
 * Name of class `index`, or null when out of range. Owned by the model.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
const char *obf_model_class_name(const struct ObfModel *model, size_t index);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void obf_model_free(struct ObfModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OBFOREST_H */
