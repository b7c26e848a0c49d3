#ifndef UTIMAGE_H
#define UTIMAGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define UTI_OK 0

// Internal error or caught panic.
#define UTI_INTERNAL 1

// Bad input: syntax, field, null pointer, invalid UTF-8, malformed JSON.
#define UTI_INPUT 2

// The target matrix is not in the image.
#define UTI_NOT_IN_IMAGE 3

// The oracle found a counterexample (the report is still returned).
#define UTI_COUNTEREXAMPLE 4

// The oracle's work estimate exceeds the budget.
#define UTI_BUDGET 5

// The field is too small for the preimage construction.
#define UTI_GUARD 6

// Opaque polynomial handle.
typedef struct UtiPoly UtiPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses `text` as a polynomial in `num_vars` variables over `field`
// (`"q=<prime>"` or `"rational"`). On success `*out` owns a new handle.
//
// # Safety
// `text` and `field` must be NUL-terminated strings; `out` must be writable.
int32_t utimage_poly_parse(const char *text, uintptr_t num_vars, const char *field, UtiPoly **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `poly` must come from [`utimage_poly_parse`] and not be freed twice.
void utimage_poly_free(UtiPoly *poly);

// Writes `ord(p)` to `*out`.
//
// # Safety
// `poly` must be a live handle; `out` must be writable.
int32_t utimage_poly_order(const UtiPoly *poly, uintptr_t *out);

// Normal form of the polynomial as a new string.
//
// # Safety
// `poly` must be a live handle; `out` must be writable.
int32_t utimage_poly_to_string(const UtiPoly *poly, char **out);

// Classification report of `p(UT_n)` as JSON.
//
// # Safety
// `poly` must be a live handle; `out_json` must be writable.
int32_t utimage_classify_json(const UtiPoly *poly, uintptr_t n, char **out_json);

// Preimage report for a target given as a JSON array of rows.
//
// # Safety
// `poly` must be a live handle; `target_json` a NUL-terminated string;
// `out_json` must be writable.
int32_t utimage_preimage_json(const UtiPoly *poly, const char *target_json, char **out_json);

// Runs the oracle on `p(UT_n)`. Returns [`UTI_COUNTEREXAMPLE`] (with the
// report in `*out_json`) when the classification is refuted.
//
// # Safety
// `poly` must be a live handle; `out_json` must be writable.
int32_t utimage_verify_json(const UtiPoly *poly,
                            uintptr_t n,
                            uint64_t seed,
                            uint64_t budget,
                            char **out_json);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void utimage_string_free(char *s);

// Message for the last failure on this thread (empty if none). Valid until
// the next failing call on the same thread; do not free.
const char *utimage_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UTIMAGE_H */
