#ifndef K3RED_H
#define K3RED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Artin invariant sentinel: the surface is not supersingular.
 */
#define K3_ARTIN_NOT_APPLICABLE -1

/**
 * Artin invariant sentinel: supersingular, but no formula applies.
 */
#define K3_ARTIN_NOT_DETERMINED -2

/**
 * Height sentinel for a supersingular reduction.
 */
#define K3_HEIGHT_INFINITE 0

typedef enum K3Status {
  K3_STATUS_OK = 0,
  K3_STATUS_INVALID_INPUT = 1,
  K3_STATUS_INCONSISTENT = 2,
  K3_STATUS_SCHEMA = 3,
  K3_STATUS_PRECISION = 4,
  K3_STATUS_INTERNAL = 5,
  K3_STATUS_NULL_POINTER = 6,
  K3_STATUS_UTF8 = 7,
  K3_STATUS_PANIC = 8,
} K3Status;

/**
 * Opaque F-crystal.
 */
typedef struct K3Crystal K3Crystal;

/**
 * Opaque reduction report.
 */
typedef struct K3Report K3Report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call into the library on this thread.
 */
const char *k3_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void k3_string_free(char *s);

/**
 * Kronecker symbol (a/m) written to `out`; m = 0 is rejected.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum K3Status k3_kronecker(int64_t a, int64_t m, int32_t *out);

/**
 * Predicts from a JSON input document (the `predict` CLI format).
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` valid for writes.
 */
enum K3Status k3_predict_json(const char *json, struct K3Report **out);

/**
 * Singular K3 with transcendental lattice [[a1, a2], [a2, a3]].
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum K3Status k3_predict_singular(int64_t a1,
                                  int64_t a2,
                                  int64_t a3,
                                  uint64_t p,
                                  struct K3Report **out);

/**
 * # Safety
 * `report` must be a live handle.
 */
uint32_t k3_report_picard(const struct K3Report *report);

/**
 * Height, or `K3_HEIGHT_INFINITE` (0) when supersingular.
 *
 * # Safety
 * `report` must be a live handle.
 */
uint32_t k3_report_height(const struct K3Report *report);

/**
 * # Safety
 * `report` must be a live handle.
 */
bool k3_report_supersingular(const struct K3Report *report);

/**
 * Artin invariant, or one of the `K3_ARTIN_*` sentinels.
 *
 * # Safety
 * `report` must be a live handle.
 */
int32_t k3_report_artin(const struct K3Report *report);

/**
 * The report as JSON; free with `k3_string_free`.
 *
 * # Safety
 * `report` must be a live handle; `out` valid for writes.
 */
enum K3Status k3_report_to_json(const struct K3Report *report, char **out);

/**
 * # Safety
 * `report` must be NULL or a handle not yet freed.
 */
void k3_report_free(struct K3Report *report);

/**
 * Analyzes a Frobenius polynomial document; writes the report as JSON.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` valid for writes.
 */
enum K3Status k3_frobenius_json(const char *json, bool strict, char **out);

/**
 * Crystal over W(F_{p^m})/p^N with Eisenstein polynomial T^e − p.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum K3Status k3_crystal_new(uint64_t p,
                             uint32_t d,
                             uint32_t e,
                             uint32_t precision,
                             uint32_t residue_degree,
                             struct K3Crystal **out);

/**
 * W-length of the cokernel, i.e. the Artin invariant.
 *
 * # Safety
 * `crystal` must be a live handle; `out` valid for writes.
 */
enum K3Status k3_crystal_artin_invariant(const struct K3Crystal *crystal, uint32_t *out);

/**
 * # Safety
 * `crystal` must be NULL or a handle not yet freed.
 */
void k3_crystal_free(struct K3Crystal *crystal);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* K3RED_H */
