#ifndef TOPIC_ANNOTATOR_H
#define TOPIC_ANNOTATOR_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TaStatus {
  TA_STATUS_OK = 0,
  TA_STATUS_NULL_ARGUMENT = 1,
  TA_STATUS_INVALID_UTF8 = 2,
  TA_STATUS_INVALID_ARGUMENT = 3,
  TA_STATUS_LOAD_FAILED = 4,
  TA_STATUS_PARSE_FAILED = 5,
  TA_STATUS_PANIC = 6,
} TaStatus;

/**
 * Loaded ontology, model and code scheme.
 */
typedef struct TaEngine TaEngine;

/**
 * Classifier settings; start from [`ta_config_default`].
 */
typedef struct TaConfig {
  double lev_threshold;
  uint32_t knn_k;
  double knn_min_sim;
  /**
   * Nonzero to cut semantic topics at the elbow of their relevance curve.
   */
  int32_t elbow;
} TaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct TaConfig ta_config_default(void);

/**
 * Load an engine. `model_path` and `scheme_path` may be null; `config` may be
 * null for defaults. On success `*out` owns a new engine.
 *
 * # Safety
 * Path arguments are null or NUL-terminated strings, `config` is null or points
 * to a `TaConfig`, and `out` is a valid pointer.
 */
enum TaStatus ta_engine_new(const char *ontology_path,
                            const char *model_path,
                            const char *scheme_path,
                            const struct TaConfig *config,
                            struct TaEngine **out);

/**
 * # Safety
 * `engine` is null or was returned by [`ta_engine_new`] and not yet freed.
 */
void ta_engine_free(struct TaEngine *engine);

/**
 * Number of topics in the engine's ontology, or 0 for a null engine.
 *
 * # Safety
 * `engine` is null or a live engine.
 */
size_t ta_engine_topic_count(const struct TaEngine *engine);

/**
 * Classify a ZIP archive or single book XML of `len` bytes and write the JSON
 * report to `*out_json`. Entries that fail to parse are listed in the report.
 *
 * # Safety
 * `engine` is a live engine, `data` points to `len` readable bytes, and
 * `out_json` is a valid pointer.
 */
enum TaStatus ta_engine_classify(const struct TaEngine *engine,
                                 const uint8_t *data,
                                 size_t len,
                                 uint32_t min_chapters,
                                 char **out_json);

/**
 * Normalized Levenshtein similarity of two strings after label normalization.
 *
 * # Safety
 * `a` and `b` are NUL-terminated strings and `out` is a valid pointer.
 */
enum TaStatus ta_levenshtein_sim(const char *a, const char *b, double *out);

/**
 * Score predictions against a gold standard; both are JSON documents in the
 * evaluation format. Nonzero `macro_average` selects macro headline scores.
 *
 * # Safety
 * `gold_json` and `predicted_json` are NUL-terminated strings and `out_json`
 * is a valid pointer.
 */
enum TaStatus ta_evaluate(const char *gold_json,
                          const char *predicted_json,
                          int32_t macro_average,
                          char **out_json);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *ta_last_error(void);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void ta_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ta_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPIC_ANNOTATOR_H */
