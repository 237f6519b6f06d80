/* C interface to the ecgtl ECG pipeline. */

#ifndef ECGTL_H
#define ECGTL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum EcgtlStatus {
  EcgtlStatus_Ok = 0,
  /**
   * Null pointer, wrong buffer length, or invalid configuration.
   */
  EcgtlStatus_InvalidArgument = 1,
  /**
   * Raw input could not be parsed (bad row/column counts, tokens,
   * headers, or unsupported storage formats).
   */
  EcgtlStatus_ParseError = 2,
  EcgtlStatus_IoError = 3,
  /**
   * A store or checkpoint file is corrupt.
   */
  EcgtlStatus_CorruptData = 4,
  /**
   * A referenced artifact (record, checkpoint) does not exist.
   */
  EcgtlStatus_MissingArtifact = 5,
  EcgtlStatus_InternalError = 6,
} EcgtlStatus;

/**
 * Opaque normalized 8 x 5000 signal matrix.
 */
typedef struct EcgtlMatrix EcgtlMatrix;

/**
 * Opaque trained model loaded from a checkpoint.
 */
typedef struct EcgtlModel EcgtlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ecgtl_version(void);

/**
 * Message of the most recent failure on this thread. Valid until the next
 * failing call on the same thread.
 */
const char *ecgtl_last_error_message(void);

/**
 * Number of values in a matrix buffer (8 leads x 5000 samples).
 */
uintptr_t ecgtl_matrix_len(void);

/**
 * Parse a whitespace-separated ASCII matrix file (5000 rows x 8 columns)
 * and min-max normalize each lead.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum EcgtlStatus ecgtl_matrix_from_asc_file(const char *path, struct EcgtlMatrix **out);

/**
 * Read a matrix from an `.ecg8` store file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum EcgtlStatus ecgtl_matrix_read(const char *path, struct EcgtlMatrix **out);

/**
 * Write a matrix to an `.ecg8` store file (bit-exact round trip).
 *
 * # Safety
 * `matrix` must be a live handle; `path` a valid NUL-terminated string.
 */
enum EcgtlStatus ecgtl_matrix_write(const struct EcgtlMatrix *matrix, const char *path);

/**
 * Copy the matrix values (row-major, lead-major) into `out`, which must
 * hold exactly `ecgtl_matrix_len()` floats.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must point to `len` floats.
 */
enum EcgtlStatus ecgtl_matrix_values(const struct EcgtlMatrix *matrix, float *out, uintptr_t len);

/**
 * Release a matrix handle.
 *
 * # Safety
 * `matrix` must be a handle from this library, released at most once.
 */
void ecgtl_matrix_free(struct EcgtlMatrix *matrix);

/**
 * Load a trained model from a checkpoint file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum EcgtlStatus ecgtl_model_load(const char *path, struct EcgtlModel **out);

/**
 * Output width of a model: 1 for regression, the class count for
 * classification.
 *
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t ecgtl_model_output_len(const struct EcgtlModel *model);

/**
 * Run eval-mode inference on one matrix. `out` receives
 * `ecgtl_model_output_len()` values: softmax class probabilities for
 * classification models, the predicted scalar for regression models.
 *
 * # Safety
 * `model` and `matrix` must be live handles; `out` must point to `out_len`
 * doubles.
 */
enum EcgtlStatus ecgtl_model_predict(struct EcgtlModel *model,
                                     const struct EcgtlMatrix *matrix,
                                     double *out,
                                     uintptr_t out_len);

/**
 * Release a model handle.
 *
 * # Safety
 * `model` must be a handle from this library, released at most once.
 */
void ecgtl_model_free(struct EcgtlModel *model);

/**
 * Mean absolute error between two vectors of length `n`.
 *
 * # Safety
 * `y` and `yhat` must point to `n` doubles; `out` must be valid.
 */
enum EcgtlStatus ecgtl_mae(const double *y, const double *yhat, uintptr_t n, double *out);

/**
 * Fraction of positions where `predicted[i] == labels[i]`.
 *
 * # Safety
 * `predicted` and `labels` must point to `n` u32 values; `out` must be valid.
 */
enum EcgtlStatus ecgtl_accuracy(const uint32_t *predicted,
                                const uint32_t *labels,
                                uintptr_t n,
                                double *out);

/**
 * One-vs-rest multi-class ROC AUC. `scores` is row-major `n x classes`;
 * `labels` holds class indices. `mean_out` receives the unweighted mean
 * over classes with a defined AUC. When `per_class_out` is non-null it
 * receives `classes` values, NaN for classes whose AUC is undefined.
 *
 * # Safety
 * `scores` must point to `n * classes` doubles, `labels` to `n` u32 values;
 * `mean_out` must be valid; `per_class_out` must be null or point to
 * `classes` doubles.
 */
enum EcgtlStatus ecgtl_auc_ovr(const double *scores,
                               uintptr_t n,
                               uintptr_t classes,
                               const uint32_t *labels,
                               double *mean_out,
                               double *per_class_out);

/**
 * Generate a synthetic toy dataset (record store plus metadata CSV) into
 * `out_dir`.
 *
 * # Safety
 * `out_dir` must be a valid NUL-terminated string.
 */
enum EcgtlStatus ecgtl_gen_toy(const char *out_dir,
                               uintptr_t count,
                               double noise_amplitude,
                               uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECGTL_H */
