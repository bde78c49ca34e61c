#ifndef NCLEAP_H
#define NCLEAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum NcleapStatus {
  NcleapOk = 0,
  NcleapErrNullArgument = 1,
  NcleapErrConfig = 2,
  NcleapErrDegenerate = 3,
  NcleapErrUtf8 = 4,
  NcleapErrJson = 5,
  NcleapErrPanic = 6,
} NcleapStatus;

/**
 * Opaque leapfrog state handle.
 */
typedef struct NcleapState NcleapState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *ncleap_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned through an out-parameter of
 * this library, not yet freed; NULL is ignored.
 */
void ncleap_string_free(char *s);

/**
 * Create a deterministic random leapfrog state in general position.
 * `backend`: 0 = rational, 1 = float, 2 = scalar; `mode`: 0 = periodic,
 * 1 = windowed with half-width `w`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum NcleapStatus ncleap_state_random(uint64_t seed,
                                      uint32_t backend,
                                      uintptr_t d,
                                      uintptr_t n,
                                      uint32_t mode,
                                      uintptr_t w,
                                      struct NcleapState **out);

/**
 * Apply one step of the map, producing a fresh handle.
 *
 * # Safety
 * `state` must be a live handle from this library; `out` a valid slot.
 */
enum NcleapStatus ncleap_state_step(const struct NcleapState *state, struct NcleapState **out);

/**
 * Serialize a state to its JSON record (matrix entries as exact fraction
 * strings).
 *
 * # Safety
 * `state` must be a live handle; `out` a valid slot; free the result with
 * [`ncleap_string_free`].
 */
enum NcleapStatus ncleap_state_to_json(const struct NcleapState *state, uint64_t layer, char **out);

/**
 * Largest residual of the cross-ratio defining property along one step
 * (exactly zero on the rational backends).
 *
 * # Safety
 * `state` must be a live handle; `out` a valid f64 slot.
 */
enum NcleapStatus ncleap_state_eq_k_residual(const struct NcleapState *state, double *out);

/**
 * Release a state handle.
 *
 * # Safety
 * `state` must be a handle from this library, not yet freed; NULL is
 * ignored.
 */
void ncleap_state_free(struct NcleapState *state);

/**
 * Run the symbolic bracket relation suite (N <= 4); the result is the JSON
 * relation report.
 *
 * # Safety
 * `out` must be a valid slot; free the result with [`ncleap_string_free`].
 */
enum NcleapStatus ncleap_run_brackets(uintptr_t n, uint64_t seed, char **out);

/**
 * Conservation of the network invariants over `steps` applications of the
 * dynamics; the result reports the exact maximal drift.
 *
 * # Safety
 * `out` must be a valid slot; free the result with [`ncleap_string_free`].
 */
enum NcleapStatus ncleap_run_invariants(uint64_t seed,
                                        uint32_t backend,
                                        uintptr_t d,
                                        uintptr_t n,
                                        uintptr_t steps,
                                        char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCLEAP_H */
