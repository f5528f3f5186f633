#ifndef STRATA_H
#define STRATA_H

/* Generated by cbindgen from the strata-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StrataStatus {
  STRATA_STATUS_OK = 0,
  STRATA_STATUS_NULL_ARGUMENT = 1,
  STRATA_STATUS_INVALID_UTF8 = 2,
  STRATA_STATUS_LOAD_FAILED = 3,
  STRATA_STATUS_PARSE_FAILED = 4,
  STRATA_STATUS_PANICKED = 5,
} StrataStatus;

/**
 * Verdict kinds, for counting with [`strata_report_count`].
 */
typedef enum StrataVerdict {
  STRATA_VERDICT_PASS = 0,
  STRATA_VERDICT_FAIL = 1,
  STRATA_VERDICT_SKIPPED = 2,
  STRATA_VERDICT_ASSUMPTION_VIOLATED = 3,
  STRATA_VERDICT_ERROR = 4,
} StrataVerdict;

typedef struct StrataReport StrataReport;

typedef struct StrataSystem StrataSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or null. Valid
 * until the next call into this library on the same thread.
 */
const char *strata_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *strata_version(void);

/**
 * Loads a `.mrt` system. `mutant` may be null.
 *
 * # Safety
 * `path` and a non-null `mutant` must be NUL-terminated strings; `out`
 * must be writable.
 */
enum StrataStatus strata_system_load(const char *path,
                                     const char *mutant,
                                     struct StrataSystem **out);

/**
 * Number of components in a loaded system.
 *
 * # Safety
 * `system` must be null or a live handle from [`strata_system_load`].
 */
size_t strata_system_component_count(const struct StrataSystem *system);

/**
 * # Safety
 * `system` must be null or a handle from [`strata_system_load`] that has
 * not been freed.
 */
void strata_system_free(struct StrataSystem *system);

/**
 * Verifies every layer of `system`. `workers` of 0 means 1.
 *
 * # Safety
 * `system` must be a live handle and `out` writable.
 */
enum StrataStatus strata_system_verify(const struct StrataSystem *system,
                                       bool short_circuit,
                                       uint32_t workers,
                                       struct StrataReport **out);

/**
 * Process exit code the command line would use: 0 when every evaluated
 * property passed, 1 otherwise (also for a null handle).
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t strata_report_exit_code(const struct StrataReport *report);

/**
 * How many verdicts of kind `kind` the report holds.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t strata_report_count(const struct StrataReport *report, enum StrataVerdict kind);

/**
 * The report as JSON; release with [`strata_string_free`]. Null for a
 * null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *strata_report_json(const struct StrataReport *report);

/**
 * # Safety
 * `report` must be null or a handle that has not been freed.
 */
void strata_report_free(struct StrataReport *report);

/**
 * Parses component source and renders it as a timed-automata template.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` writable.
 */
enum StrataStatus strata_translate_component(const char *source, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void strata_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRATA_H */
