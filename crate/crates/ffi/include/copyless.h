#ifndef COPYLESS_H
#define COPYLESS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. The first four coincide with the command-line exit codes.
typedef enum copyless_status {
  COPYLESS_STATUS_OK = 0,
  COPYLESS_STATUS_TYPE_ERROR = 1,
  COPYLESS_STATUS_VIOLATION = 2,
  COPYLESS_STATUS_PARSE_ERROR = 3,
  COPYLESS_STATUS_INVALID_ARGUMENT = 4,
  COPYLESS_STATUS_INTERNAL = 5,
} copyless_status;

// A parsed program.
typedef struct copyless_program copyless_program;

// A closed endpoint type.
typedef struct copyless_type copyless_type;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread, or null. Valid until the
// next library call on the same thread.
const char *copyless_last_error(void);

// Library version as a static string.
const char *copyless_version(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void copyless_string_free(char *s);

// Parses program source.
//
// # Safety
// `src` must be a NUL-terminated string; `out` must be writable.
enum copyless_status copyless_program_parse(const char *src, struct copyless_program **out);

// # Safety
// `p` must be null or a handle from `copyless_program_parse`, freed once.
void copyless_program_free(struct copyless_program *p);

// Type checks the program under its declared environment.
//
// # Safety
// `p` must be a live program handle.
enum copyless_status copyless_program_check(const struct copyless_program *p);

// Runs the program with a seeded random scheduler. Writes the JSON run
// report to `out_json`; returns `COPYLESS_STATUS_VIOLATION` when the monitor
// flags the final configuration.
//
// # Safety
// `p` must be a live program handle; `out_json` must be writable.
enum copyless_status copyless_program_run(const struct copyless_program *p,
                                          uint64_t seed,
                                          uint64_t max_steps,
                                          bool unchecked,
                                          char **out_json);

// Explores all schedules up to `depth` steps, visiting at most `budget`
// states. Writes the JSON report to `out_json`.
//
// # Safety
// `p` must be a live program handle; `out_json` must be writable.
enum copyless_status copyless_program_explore(const struct copyless_program *p,
                                              uint32_t depth,
                                              uint64_t budget,
                                              bool unchecked,
                                              char **out_json);

// Parses a closed endpoint type.
//
// # Safety
// `src` must be a NUL-terminated string; `out` must be writable.
enum copyless_status copyless_type_parse(const char *src, struct copyless_type **out);

// # Safety
// `t` must be null or a type handle, freed once.
void copyless_type_free(struct copyless_type *t);

// Renders a type in concrete syntax.
//
// # Safety
// `t` must be a live type handle.
char *copyless_type_render(const struct copyless_type *t);

// The dual of `t` as a new handle.
//
// # Safety
// `t` must be a live type handle; `out` must be writable.
enum copyless_status copyless_type_dual(const struct copyless_type *t, struct copyless_type **out);

// Writes whether `t <= s`.
//
// # Safety
// `t`, `s` must be live type handles; `out` must be writable.
enum copyless_status copyless_type_subtype(const struct copyless_type *t,
                                           const struct copyless_type *s,
                                           bool *out);

// Writes the weight of `t`. `*finite` is false for an infinite weight,
// in which case `*value` is left untouched.
//
// # Safety
// `t` must be a live type handle; `finite` and `value` must be writable.
enum copyless_status copyless_type_weight(const struct copyless_type *t,
                                          bool *finite,
                                          uint64_t *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COPYLESS_H */
