#ifndef DICA_H
#define DICA_H

/* Generated by cbindgen from dica-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum DicaStatus {
  DICA_STATUS_OK = 0,
  // Hard evidence combinations with no support anywhere.
  DICA_STATUS_CONTRADICTORY_EVIDENCE = 1,
  // Mismatched shapes or out-of-range indices.
  DICA_STATUS_DIMENSION = 2,
  // Product space above the supported limit.
  DICA_STATUS_CAPACITY = 3,
  // Unparseable or invalid file contents.
  DICA_STATUS_FORMAT = 4,
  // The model has no label block.
  DICA_STATUS_MISSING_LABEL_BLOCK = 5,
  // Precondition violation in the supplied values.
  DICA_STATUS_INVALID = 6,
  DICA_STATUS_IO = 7,
  DICA_STATUS_NULL_POINTER = 8,
  DICA_STATUS_INVALID_UTF8 = 9,
  // An internal panic was caught at the boundary.
  DICA_STATUS_PANIC = 10,
} DicaStatus;

// Opaque model handle.
typedef struct DicaModelHandle DicaModelHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread; empty until an error occurs. The
// pointer stays valid until the next failing call on the same thread.
const char *dica_last_error_message(void);

// Build a freshly initialized model. `label_size` 0 means no label block.
// On success writes a handle the caller must free with `dica_model_free`.
//
// # Safety
// `source_sizes`/`visible_sizes` must point to `num_sources`/`num_visible`
// readable elements and `out_model` must be a valid destination.
enum DicaStatus dica_model_build(const size_t *source_sizes,
                                 size_t num_sources,
                                 const size_t *visible_sizes,
                                 size_t num_visible,
                                 size_t label_size,
                                 uint64_t seed,
                                 struct DicaModelHandle **out_model);

// Load a model document.
//
// # Safety
// `path` must be a NUL-terminated string; `out_model` must be valid.
enum DicaStatus dica_model_load(const char *path, struct DicaModelHandle **out_model);

// Save a model document.
//
// # Safety
// `model` must be a live handle; `path` a NUL-terminated string.
enum DicaStatus dica_model_save(const struct DicaModelHandle *model, const char *path);

// Release a handle. Passing NULL is a no-op.
//
// # Safety
// `model` must have come from this library and not be freed twice.
void dica_model_free(struct DicaModelHandle *model);

size_t dica_model_num_sources(const struct DicaModelHandle *model);

size_t dica_model_num_visible(const struct DicaModelHandle *model);

size_t dica_model_product_size(const struct DicaModelHandle *model);

// Label alphabet size; 0 when the model has no label block.
size_t dica_model_label_size(const struct DicaModelHandle *model);

// Length of a flattened source-posterior buffer (sum of source sizes).
size_t dica_model_code_len(const struct DicaModelHandle *model);

// Length of a flattened visible-forward buffer (sum of visible sizes).
size_t dica_model_forward_len(const struct DicaModelHandle *model);

// Train the model in place on hard examples. `examples` is row-major,
// `num_examples` rows of `num_visible` symbols. `labels` must be NULL for
// unsupervised training, or point to `num_examples` class indices to also
// train the label block. On success, optionally writes the final epoch's
// mean per-block log-likelihood to `out_mean_log_likelihood`.
//
// # Safety
// Buffers must match the documented lengths; `model` must be a live handle.
enum DicaStatus dica_model_train(struct DicaModelHandle *model,
                                 const uint32_t *examples,
                                 size_t num_examples,
                                 const uint32_t *labels,
                                 size_t epochs,
                                 size_t inner_cycles,
                                 double *out_mean_log_likelihood);

// Encode a fully observed input into its soft source code, written as
// concatenated per-source posteriors (`dica_model_code_len` doubles).
//
// # Safety
// `observed` must hold `num_visible` symbols; `out_code` must hold
// `dica_model_code_len` doubles.
enum DicaStatus dica_model_encode(const struct DicaModelHandle *model,
                                  const uint32_t *observed,
                                  double *out_code);

// Generate the visible forwards for one source configuration, written as
// concatenated per-variable distributions (`dica_model_forward_len`).
//
// # Safety
// `config` must hold `num_sources` symbols; `out_forwards` must hold
// `dica_model_forward_len` doubles.
enum DicaStatus dica_model_generate(const struct DicaModelHandle *model,
                                    const uint32_t *config,
                                    double *out_forwards);

// Fill in erasures: `observed[j]` is the symbol at variable `j`, or -1
// when it is missing. Writes the per-variable forwards (observed
// variables echo their evidence).
//
// # Safety
// `observed` must hold `num_visible` entries; `out_forwards` must hold
// `dica_model_forward_len` doubles.
enum DicaStatus dica_model_complete(const struct DicaModelHandle *model,
                                    const int32_t *observed,
                                    double *out_forwards);

// Error correction: fully observed (possibly corrupted) input in,
// per-variable forwards out.
//
// # Safety
// `observed` must hold `num_visible` symbols; `out_forwards` must hold
// `dica_model_forward_len` doubles.
enum DicaStatus dica_model_correct(const struct DicaModelHandle *model,
                                   const uint32_t *observed,
                                   double *out_forwards);

// Classify a fully observed input: writes the class posterior
// (`dica_model_label_size` doubles).
//
// # Safety
// `observed` must hold `num_visible` symbols; `out_class_posterior` must
// hold `dica_model_label_size` doubles.
enum DicaStatus dica_model_classify(const struct DicaModelHandle *model,
                                    const uint32_t *observed,
                                    double *out_class_posterior);

// Class prototype: inject a backward delta at the label and write the
// per-variable forwards.
//
// # Safety
// `out_forwards` must hold `dica_model_forward_len` doubles.
enum DicaStatus dica_model_prototype(const struct DicaModelHandle *model,
                                     size_t class_index,
                                     double *out_forwards);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DICA_H */
