#ifndef HEPAFLOW_H
#define HEPAFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_UTF8 = 2,
  HF_STATUS_CONFIG = 3,
  HF_STATUS_DATA = 4,
  HF_STATUS_NUMERIC = 5,
  HF_STATUS_IO = 6,
  HF_STATUS_BUFFER_TOO_SMALL = 7,
  HF_STATUS_PANIC = 8,
} HfStatus;

/**
 * A loaded or simulated dataset.
 */
typedef struct HfDataset HfDataset;

/**
 * The result of a full pipeline run.
 */
typedef struct HfReport HfReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hf_version(void);

/**
 * Loads an ILPD CSV (Gender dropped, target mapped to 1 = disease).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum HfStatus hf_dataset_load(const char *path, struct HfDataset **out);

/**
 * Generates a simulated cohort from a JSON spec (`{}` for defaults).
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum HfStatus hf_simulate(const char *spec_json, struct HfDataset **out);

/**
 * # Safety
 * `ds` must be null or a handle from this library.
 */
size_t hf_dataset_rows(const struct HfDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle from this library.
 */
size_t hf_dataset_cols(const struct HfDataset *ds);

/**
 * Copies the row-major feature matrix into `buf` (`len` doubles, at least
 * rows × cols). Missing cells are NaN.
 *
 * # Safety
 * `ds` must be a handle from this library; `buf` must hold `len` doubles.
 */
enum HfStatus hf_dataset_copy_features(const struct HfDataset *ds, double *buf, size_t len);

/**
 * Copies the 0/1 labels into `buf` (`len` bytes, at least rows).
 *
 * # Safety
 * `ds` must be a handle from this library; `buf` must hold `len` bytes.
 */
enum HfStatus hf_dataset_copy_labels(const struct HfDataset *ds, uint8_t *buf, size_t len);

/**
 * # Safety
 * `ds` must be null or a handle from this library not yet freed.
 */
void hf_dataset_free(struct HfDataset *ds);

/**
 * Runs the full pipeline from a JSON config and writes its report files.
 * Relative paths in the config resolve against the working directory.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum HfStatus hf_run(const char *config_json, struct HfReport **out);

/**
 * The run summary as JSON, owned by the report.
 *
 * # Safety
 * `report` must be null or a live handle from [`hf_run`].
 */
const char *hf_report_summary_json(const struct HfReport *report);

/**
 * # Safety
 * `report` must be null or a handle from [`hf_run`] not yet freed.
 */
void hf_report_free(struct HfReport *report);

/**
 * ROC AUC of positive-class scores (ties get half credit).
 *
 * # Safety
 * `labels` and `scores` must each hold `n` values; `out` must be writable.
 */
enum HfStatus hf_roc_auc(const uint8_t *labels, const double *scores, size_t n, double *out);

/**
 * Mean squared error between P(positive) and the 0/1 outcome.
 *
 * # Safety
 * `labels` and `probabilities` must each hold `n` values; `out` must be
 * writable.
 */
enum HfStatus hf_brier(const uint8_t *labels, const double *probabilities, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEPAFLOW_H */
