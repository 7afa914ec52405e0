/* C interface to the pidaudit disparity-auditing engine. */

#ifndef PIDAUDIT_H
#define PIDAUDIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum PaudStatus {
  PAUD_STATUS_OK = 0,
  /**
   * A pointer argument was null or a string was not valid UTF-8.
   */
  PAUD_STATUS_NULL_ARGUMENT = 1,
  /**
   * The inputs were rejected (unknown name, bad schema, bad value).
   */
  PAUD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation failed; see paud_last_error_message().
   */
  PAUD_STATUS_FAILED = 3,
} PaudStatus;

/**
 * Opaque joint-distribution handle.
 */
typedef struct PaudDist PaudDist;

/**
 * Four-way decomposition of I(Z;(A,B)), in bits.
 */
typedef struct PaudPidResult {
  double uni_a_given_b;
  double uni_b_given_a;
  double red;
  double syn;
  double total;
  uint64_t solver_iterations;
  double objective_gap_estimate;
  /**
   * 1 when the solver met its convergence criterion.
   */
  uint8_t converged;
} PaudPidResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *paud_version(void);

/**
 * Message for the most recent error on this thread, or null.
 * Valid until the next library call on the same thread.
 */
const char *paud_last_error_message(void);

/**
 * Builds a joint distribution from a built-in generator
 * (canonical1|canonical2|canonical3|case_study|pid_example).
 * `samples = 0` yields the exact analytic pmf; otherwise the empirical
 * pmf of that many seeded samples.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string and `out` a valid
 * pointer; the returned handle must be freed with `paud_dist_free`.
 */
enum PaudStatus paud_dist_generate(const char *name,
                                   uint64_t samples,
                                   uint64_t seed,
                                   struct PaudDist **out);

/**
 * Loads a CSV (header row required) and estimates the joint over the
 * given columns: protected, comma-separated features, decision.
 *
 * # Safety
 * All strings must be valid NUL-terminated UTF-8; `out` must be a valid
 * pointer; the returned handle must be freed with `paud_dist_free`.
 */
enum PaudStatus paud_dist_from_csv(const char *path,
                                   const char *protected_,
                                   const char *decision,
                                   const char *features_csv,
                                   struct PaudDist **out);

/**
 * Frees a distribution handle (null is a no-op).
 *
 * # Safety
 * `dist` must be a handle returned by this library, not yet freed.
 */
void paud_dist_free(struct PaudDist *dist);

/**
 * Mutual information I(a;b) in bits.
 *
 * # Safety
 * `dist` must be a live handle; strings valid; `out` a valid pointer.
 */
enum PaudStatus paud_mutual_info(const struct PaudDist *dist,
                                 const char *a,
                                 const char *b,
                                 double *out);

/**
 * Partial information decomposition of I(z;(a,b)). `b_csv` may name
 * several columns, which are grouped into one composite source.
 *
 * # Safety
 * `dist` must be a live handle; strings valid; `out` a valid pointer.
 */
enum PaudStatus paud_pid_decompose(const struct PaudDist *dist,
                                   const char *z,
                                   const char *a,
                                   const char *b_csv,
                                   struct PaudPidResult *out);

/**
 * Runs a full audit and returns the JSON report (schema_version 1).
 * `mode` is "distributional" or "interventional"; the latter requires an
 * oracle spec (builtin:<name> | table:<csv> | exec:<command>); pass null
 * otherwise. `epsilon` is the early-truncation threshold in bits.
 *
 * # Safety
 * `dist` must be a live handle; strings valid (oracle_spec may be
 * null); `out_json` a valid pointer. The returned string must be freed
 * with `paud_string_free`.
 */
enum PaudStatus paud_audit_json(const struct PaudDist *dist,
                                const char *protected_,
                                const char *decision,
                                const char *features_csv,
                                const char *mode,
                                const char *oracle_spec,
                                double epsilon,
                                char **out_json);

/**
 * Frees a string returned by this library (null is a no-op).
 *
 * # Safety
 * `s` must originate from this library and not have been freed.
 */
void paud_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PIDAUDIT_H */
