#ifndef UNSTYLE_H
#define UNSTYLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UnstyleStatus {
  UNSTYLE_STATUS_OK = 0,
  UNSTYLE_STATUS_NULL_ARGUMENT = 1,
  UNSTYLE_STATUS_INVALID_UTF8 = 2,
  UNSTYLE_STATUS_SYNTAX = 3,
  UNSTYLE_STATUS_IO = 4,
  UNSTYLE_STATUS_MODEL = 5,
  UNSTYLE_STATUS_SEARCH = 6,
  UNSTYLE_STATUS_FORMAT = 7,
  UNSTYLE_STATUS_PANIC = 8,
} UnstyleStatus;

// A trained attribution model.
typedef struct UnstyleModel UnstyleModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version; static storage, never freed.
const char *unstyle_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library on this thread.
const char *unstyle_last_error(void);

// # Safety
// `s` is null or was returned by this library and not yet freed.
void unstyle_string_free(char *s);

// Loads a model saved by `unstyle train-attrib`.
//
// # Safety
// `path` is a NUL-terminated string; `out` is writable.
enum UnstyleStatus unstyle_model_load(const char *path, struct UnstyleModel **out);

// # Safety
// `json` is a NUL-terminated string; `out` is writable.
enum UnstyleStatus unstyle_model_from_json(const char *json, struct UnstyleModel **out);

// # Safety
// `model` is null or came from a load function and was not yet freed.
void unstyle_model_free(struct UnstyleModel *model);

// Number of authors the model distinguishes; 0 for a null model.
//
// # Safety
// `model` is null or a live model.
size_t unstyle_model_author_count(const struct UnstyleModel *model);

// Most probable author of `source`.
//
// # Safety
// Pointers are valid; `out_author` is writable.
enum UnstyleStatus unstyle_model_predict(const struct UnstyleModel *model,
                                         const char *source,
                                         char **out_author);

// Tokens, leaf paths and data-flow graph as one JSON document.
//
// # Safety
// `source` is a NUL-terminated string; `out_json` is writable.
enum UnstyleStatus unstyle_encode(const char *source, char **out_json);

// Number of applicable transform actions.
//
// # Safety
// `source` is a NUL-terminated string; `out_count` is writable.
enum UnstyleStatus unstyle_action_count(const char *source, size_t *out_count);

// Untargeted search with default settings except `budget` and `seed`. The
// result JSON carries `success`, `final_code`, `predicted` and `sequence`.
//
// # Safety
// Pointers are valid; `out_json` is writable.
enum UnstyleStatus unstyle_evade(const struct UnstyleModel *model,
                                 const char *source,
                                 const char *author,
                                 size_t budget,
                                 uint64_t seed,
                                 char **out_json);

// Runs both programs on every test; `tests_json` is an array of
// `{"input": ..., "expected_output": ...}`. Writes 1 when equivalent, else 0.
//
// # Safety
// Pointers are valid; `out_equivalent` is writable.
enum UnstyleStatus unstyle_check_equivalence(const char *original,
                                             const char *candidate,
                                             const char *tests_json,
                                             int32_t *out_equivalent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNSTYLE_H */
