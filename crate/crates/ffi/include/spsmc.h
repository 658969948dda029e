#ifndef SPSMC_H
#define SPSMC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpsmcAtBound {
  SPSMC_AT_BOUND_BLOCK = 0,
  SPSMC_AT_BOUND_FREEZE = 1,
} SpsmcAtBound;

typedef enum SpsmcSourceKind {
  // A server system (`.sps`).
  SPSMC_SOURCE_KIND_MODEL = 0,
  // A specification (`.mfstl`).
  SPSMC_SOURCE_KIND_SPEC = 1,
  // A system followed by `MFSTLSPEC` (`.spsml`).
  SPSMC_SOURCE_KIND_COMBINED = 2,
} SpsmcSourceKind;

// Result of every fallible call.
typedef enum SpsmcStatus {
  SPSMC_STATUS_OK = 0,
  // A null pointer or a string that is not UTF-8.
  SPSMC_STATUS_INVALID_ARGUMENT = 1,
  // Syntax or well-formedness errors in the input text.
  SPSMC_STATUS_PARSE = 2,
  // Any other input error: unreadable file, missing model, zero bound.
  SPSMC_STATUS_INPUT = 3,
  // A state-space or search limit was reached.
  SPSMC_STATUS_CAPACITY = 4,
  // An internal panic was caught at the boundary.
  SPSMC_STATUS_INTERNAL = 5,
} SpsmcStatus;

typedef enum SpsmcVerdict {
  SPSMC_VERDICT_HOLDS = 0,
  SPSMC_VERDICT_VIOLATED = 1,
} SpsmcVerdict;

// A parsed input file.
typedef struct SpsmcInput SpsmcInput;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses the file at `path`, choosing the format by extension. `model_path`
// may be null; when given it names a `.sps` file supplying the system for a
// `.mfstl` specification.
//
// # Safety
// `path` and `model_path` must be null or point to nul-terminated strings;
// `out` must be valid for writing a pointer.
enum SpsmcStatus spsmc_input_load(const char *path,
                                  const char *model_path,
                                  struct SpsmcInput **out);

// Parses `text` as the given kind. For a specification, `model` may be a
// previously parsed input that carries a server system, or null.
//
// # Safety
// `text` must point to a nul-terminated string, `model` must be null or a
// live handle, and `out` must be valid for writing a pointer.
enum SpsmcStatus spsmc_input_from_text(const char *text,
                                       enum SpsmcSourceKind kind,
                                       const struct SpsmcInput *model,
                                       struct SpsmcInput **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `input` must be null or a handle not yet freed.
void spsmc_input_free(struct SpsmcInput *input);

// Writes the per-type bound profile, one `type: r=R n=N` line per type.
//
// # Safety
// `input` must be a live handle and `out` valid for writing a pointer.
enum SpsmcStatus spsmc_bound(const struct SpsmcInput *input, char **out);

// Writes the grounded LTL formula.
//
// # Safety
// `input` must be a live handle and `out` valid for writing a pointer.
enum SpsmcStatus spsmc_ground(const struct SpsmcInput *input, char **out);

// Checks the specification against the system. On success `verdict` is set
// and, when `report` is not null, the rendered verdict (with the
// counterexample when violated) is written to it.
//
// # Safety
// `input` must be a live handle, `verdict` valid for writing, and `report`
// null or valid for writing a pointer.
enum SpsmcStatus spsmc_check(const struct SpsmcInput *input,
                             enum SpsmcAtBound at_bound,
                             enum SpsmcVerdict *verdict,
                             char **report);

// Writes the SMV encoding.
//
// # Safety
// `input` must be a live handle and `out` valid for writing a pointer.
enum SpsmcStatus spsmc_emit_smv(const struct SpsmcInput *input, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void spsmc_string_free(char *s);

// The message for the last failed call on this thread, or null. The
// pointer stays valid until the next call into the library on this thread.
const char *spsmc_last_error_message(void);

// The library version as a static nul-terminated string.
const char *spsmc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPSMC_H */
