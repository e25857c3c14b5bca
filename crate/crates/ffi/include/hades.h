#ifndef HADES_H
#define HADES_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  HADES_STATUS_OK = 0,
  HADES_STATUS_NULL_ARGUMENT = 1,
  HADES_STATUS_INVALID_UTF8 = 2,
  HADES_STATUS_INVALID_ARGUMENT = 3,
  HADES_STATUS_IO = 4,
  HADES_STATUS_INVALID_DATA = 5,
  HADES_STATUS_PANIC = 6,
} HadesStatus;

/**
 * A loaded analysis bundle answering API requests.
 */
typedef struct HadesBundle HadesBundle;

/**
 * A fitted topic model.
 */
typedef struct HadesModel HadesModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *hades_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from this thread.
 */
const char *hades_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hades_string_free(char *s);

/**
 * Hellinger distance between two distributions of length `len`.
 *
 * # Safety
 * `p` and `q` must point to `len` doubles; `out` to one writable double.
 */
HadesStatus hades_hellinger(const double *p, const double *q, size_t len, double *out);

/**
 * Jensen-Shannon divergence (natural log) between two distributions.
 *
 * # Safety
 * Same as [`hades_hellinger`].
 */
HadesStatus hades_jensen_shannon(const double *p, const double *q, size_t len, double *out);

/**
 * Loads a model file written by `hades fit`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
HadesStatus hades_model_load(const char *path, HadesModel **out);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from [`hades_model_load`] and not have been freed.
 */
void hades_model_free(HadesModel *model);

/**
 * Number of topics, documents and vocabulary terms. Any out pointer may be NULL.
 *
 * # Safety
 * `model` must be a live handle.
 */
HadesStatus hades_model_shape(const HadesModel *model, size_t *topics, size_t *docs, size_t *terms);

/**
 * Copies document `doc`'s topic distribution into `buf`, which must hold
 * exactly K doubles.
 *
 * # Safety
 * `model` must be a live handle; `buf` must point to `len` writable doubles.
 */
HadesStatus hades_model_theta(const HadesModel *model, size_t doc, double *buf, size_t len);

/**
 * Relevance-ranked terms per topic plus corpus saliency, as JSON.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable. Free the result with
 * [`hades_string_free`].
 */
HadesStatus hades_model_relevance_json(const HadesModel *model,
                                       double lambda,
                                       size_t top_n,
                                       char **out);

/**
 * Loads an exported analysis bundle directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
HadesStatus hades_bundle_load(const char *path, HadesBundle **out);

/**
 * Releases a bundle. NULL is ignored.
 *
 * # Safety
 * `bundle` must come from [`hades_bundle_load`] and not have been freed.
 */
void hades_bundle_free(HadesBundle *bundle);

/**
 * Answers an API GET, e.g. path `/api/sections/energy/terms` with query
 * `lambda=0.6`. `query` may be NULL. The HTTP status goes to `http_status`
 * and the JSON body to `body`; a 4xx answer still returns `Ok`.
 *
 * # Safety
 * `bundle` must be a live handle; strings NUL-terminated; out pointers
 * writable. Free `body` with [`hades_string_free`].
 */
HadesStatus hades_bundle_get(const HadesBundle *bundle,
                             const char *path,
                             const char *query,
                             uint16_t *http_status,
                             char **body);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HADES_H */
