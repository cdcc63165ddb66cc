#ifndef PRIVACY_CONTROLLER_H
#define PRIVACY_CONTROLLER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `PC_STATUS_OK` is zero; everything else is an error.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER,
  PC_STATUS_INVALID_UTF8,
  PC_STATUS_PARSE_ERROR,
  PC_STATUS_INVALID_INPUT,
  PC_STATUS_EMPTY_TRANSCRIPT,
  PC_STATUS_EMPTY_CORPUS,
  PC_STATUS_MISSING_LABELS,
  PC_STATUS_UNKNOWN_CONVERSATION,
  PC_STATUS_IO_ERROR,
  PC_STATUS_PANIC,
} PcStatus;

typedef enum PcMatchMode {
  PC_MATCH_MODE_FULL = 0,
  PC_MATCH_MODE_PARTIAL = 1,
} PcMatchMode;

typedef enum PcLevel {
  PC_LEVEL_LOW = 0,
  PC_LEVEL_MODERATE = 1,
  PC_LEVEL_HIGH = 2,
} PcLevel;

typedef enum PcAction {
  PC_ACTION_FULL = 0,
  PC_ACTION_SUMMARY = 1,
  PC_ACTION_REFUSE = 2,
} PcAction;

/**
 * Loaded rule set plus extraction resources and trust groups.
 */
typedef struct PcEngine PcEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an engine from rule-set JSON. A null `ruleset_json` gives an
 * engine with no rules, which answers high for everything.
 *
 * # Safety
 * `ruleset_json` must be null or a NUL-terminated string; `out` must be
 * a valid pointer.
 */
enum PcStatus pc_engine_new(const char *ruleset_json, struct PcEngine **out);

/**
 * Creates an engine from a rule-set file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum PcStatus pc_engine_load(const char *path, struct PcEngine **out);

/**
 * # Safety
 * `engine` must be null or come from `pc_engine_new`/`pc_engine_load`,
 * and must not be used afterwards.
 */
void pc_engine_free(struct PcEngine *engine);

/**
 * # Safety
 * `engine` must be a live engine.
 */
enum PcStatus pc_engine_set_match_mode(struct PcEngine *engine, enum PcMatchMode mode);

/**
 * Replaces the trust groups used by `pc_engine_gate`. The JSON maps
 * group names to arrays of member ids.
 *
 * # Safety
 * `engine` must be a live engine; `groups_json` a NUL-terminated string.
 */
enum PcStatus pc_engine_set_groups(struct PcEngine *engine, const char *groups_json);

/**
 * # Safety
 * `engine` must be a live engine; `out` a valid pointer.
 */
enum PcStatus pc_engine_ruleset_version(const struct PcEngine *engine, uint64_t *out);

/**
 * Predicts the control level of a conversation record given as JSON
 * (`{id, transcript, context}`).
 *
 * # Safety
 * `engine` must be a live engine, `record_json` a NUL-terminated string
 * and `out` a valid pointer.
 */
enum PcStatus pc_engine_predict(const struct PcEngine *engine,
                                const char *record_json,
                                enum PcLevel *out);

/**
 * Writes the extracted metadata tuple as JSON to `*out_json`.
 *
 * # Safety
 * As for `pc_engine_predict`; free the result with `pc_string_free`.
 */
enum PcStatus pc_engine_extract(const struct PcEngine *engine,
                                const char *record_json,
                                char **out_json);

/**
 * Writes the vote breakdown (predicted level, tally, fired rules) as JSON.
 *
 * # Safety
 * As for `pc_engine_predict`; free the result with `pc_string_free`.
 */
enum PcStatus pc_engine_explain(const struct PcEngine *engine,
                                const char *record_json,
                                char **out_json);

/**
 * Decides how much of the conversation `querier` may see. The level is
 * predicted from the record unless `level` is non-null, in which case it
 * is used as given.
 *
 * # Safety
 * `engine` must be a live engine, the strings NUL-terminated, `level`
 * null or valid, and `out` a valid pointer.
 */
enum PcStatus pc_engine_gate(const struct PcEngine *engine,
                             const char *record_json,
                             const char *querier,
                             const enum PcLevel *level,
                             enum PcAction *out);

/**
 * Token-set cosine similarity of two texts.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated strings; `out` a valid pointer.
 */
enum PcStatus pc_similarity(const char *a, const char *b, double *out);

/**
 * Mines a rule set from a labelled JSONL corpus held in memory and
 * writes it as JSON to `*out_json`.
 *
 * # Safety
 * `corpus_jsonl` must be a NUL-terminated string and `out_json` a valid
 * pointer; free the result with `pc_string_free`.
 */
enum PcStatus pc_train(const char *corpus_jsonl,
                       uint32_t n_supports,
                       double min_confidence,
                       char **out_json);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void pc_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pc_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRIVACY_CONTROLLER_H */
