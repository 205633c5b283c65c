#ifndef SGG_H
#define SGG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SggStatus {
  SGG_STATUS_OK = 0,
  SGG_STATUS_NULL_POINTER = 1,
  SGG_STATUS_INVALID_UTF8 = 2,
  SGG_STATUS_IO = 3,
  SGG_STATUS_JSON = 4,
  SGG_STATUS_SCHEMA = 5,
  SGG_STATUS_CONFIG = 6,
  SGG_STATUS_DOMAIN = 7,
  SGG_STATUS_USAGE = 8,
  SGG_STATUS_FORMAT = 9,
  SGG_STATUS_ONTOLOGY_MISMATCH = 10,
  SGG_STATUS_DIVERGED = 11,
  SGG_STATUS_PANIC = 12,
} SggStatus;

/**
 * A trained model with the co-occurrence statistics it runs on.
 */
typedef struct SggModel SggModel;

/**
 * Object and relation vocabulary.
 */
typedef struct SggOntology SggOntology;

/**
 * A list of scenes validated against an ontology.
 */
typedef struct SggScenes SggScenes;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *sgg_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sgg_string_free(char *s);

/**
 * Composite Open-Images score from R@50 and the two weighted mAPs.
 */
double sgg_score_wtd(double r50, double wmap_rel, double wmap_phr);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SggStatus sgg_ontology_load(const char *path, struct SggOntology **out);

/**
 * # Safety
 * `ontology` must come from [`sgg_ontology_load`] or be null.
 */
void sgg_ontology_free(struct SggOntology *ontology);

/**
 * Loads a JSON Lines scene file.
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum SggStatus sgg_scenes_load(const struct SggOntology *ontology,
                               const char *path,
                               struct SggScenes **out);

/**
 * Number of scenes, 0 for null.
 *
 * # Safety
 * `scenes` must come from [`sgg_scenes_load`] or be null.
 */
size_t sgg_scenes_len(const struct SggScenes *scenes);

/**
 * # Safety
 * `scenes` must come from [`sgg_scenes_load`] or be null.
 */
void sgg_scenes_free(struct SggScenes *scenes);

/**
 * Loads a checkpoint and the statistics file it is used with.
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum SggStatus sgg_model_load(const struct SggOntology *ontology,
                              const char *checkpoint_path,
                              const char *stats_path,
                              struct SggModel **out);

/**
 * # Safety
 * `model` must come from [`sgg_model_load`] or be null.
 */
void sgg_model_free(struct SggModel *model);

/**
 * Ranked triplets for every scene as a JSON array of scene predictions.
 * `mode` is "predcls", "sgcls" or "sgdet".
 *
 * # Safety
 * Pointers must be valid; `out_json` must be writable.
 */
enum SggStatus sgg_infer_json(const struct SggModel *model,
                              const struct SggScenes *scenes,
                              const char *mode,
                              char **out_json);

/**
 * Metric report (fractions) for a JSON array of scene predictions against
 * the GT of `scenes`, at K = 20, 50, 100.
 *
 * # Safety
 * Pointers must be valid; `out_json` must be writable.
 */
enum SggStatus sgg_eval_json(const struct SggOntology *ontology,
                             const struct SggScenes *scenes,
                             const char *predictions_json,
                             char **out_json);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sgg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SGG_H */
