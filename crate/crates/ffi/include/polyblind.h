#ifndef POLYBLIND_H
#define POLYBLIND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum PbStatus {
  PB_STATUS_OK = 0,
  PB_STATUS_NULL_POINTER = 1,
  PB_STATUS_INVALID_UTF8 = 2,
  PB_STATUS_PARSE = 3,
  PB_STATUS_INVALID = 4,
  PB_STATUS_OVERFLOW = 5,
  PB_STATUS_BUDGET_EXCEEDED = 6,
  PB_STATUS_PANIC = 7,
} PbStatus;

// Opaque machine handle.
typedef struct PbMachine PbMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread (empty after a success).
// The pointer stays valid until the next call on the same thread.
const char *pb_last_error(void);

// Creates a machine from the built-in catalog (`nb_a`, `nb_ab`,
// `nb_ab_blind`, `nb_ab_pebble`, `itpow2`).
//
// # Safety
// `name` must be a NUL-terminated string and `out_machine` a valid pointer.
enum PbStatus pb_machine_from_catalog(const char *name, struct PbMachine **out_machine);

// Creates a machine from a JSON document with an inline morphism.
//
// # Safety
// `json` must be a NUL-terminated string and `out_machine` a valid pointer.
enum PbStatus pb_machine_from_json(const char *json, struct PbMachine **out_machine);

// Releases a machine. Null is ignored.
//
// # Safety
// `m` must come from a `pb_machine_*` constructor and not be used again.
void pb_machine_free(struct PbMachine *m);

// Nesting level `k` of the machine (0 for a null handle).
//
// # Safety
// `m` must be null or a live handle.
size_t pb_machine_level(const struct PbMachine *m);

// 0 for marble, 1 for blind, 2 for pebble machines.
//
// # Safety
// `m` must be a live handle and `out_kind` a valid pointer.
enum PbStatus pb_machine_kind(const struct PbMachine *m, uint32_t *out_kind);

// Evaluates the machine on a word spelled with the letter names of its
// morphism. Values above `UINT64_MAX` give `PB_STATUS_OVERFLOW`.
//
// # Safety
// `m` must be a live handle, `word` a NUL-terminated string and `out_value`
// a valid pointer.
enum PbStatus pb_machine_eval(const struct PbMachine *m, const char *word, uint64_t *out_value);

// Checks K-permutability of a marble machine; `out_permutable` receives
// 1 or 0.
//
// # Safety
// `m` must be a live handle and `out_permutable` a valid pointer.
enum PbStatus pb_check_permutable(const struct PbMachine *m,
                                  size_t k_max_word,
                                  uint64_t budget,
                                  int32_t *out_permutable);

// Bracketed minimal-height forest of a word over the machine's morphism.
//
// # Safety
// `m` must be a live handle, `word` a NUL-terminated string and
// `out_forest` a valid pointer; release the result with `pb_string_free`.
enum PbStatus pb_machine_forest(const struct PbMachine *m, const char *word, char **out_forest);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used again.
void pb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYBLIND_H */
