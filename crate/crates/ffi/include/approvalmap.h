#ifndef APPROVALMAP_H
#define APPROVALMAP_H

/* Generated by cbindgen from the approvalmap-ffi sources. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AmMetric {
  AM_METRIC_APPROVALWISE = 0,
  AM_METRIC_ISOMORPHIC_HAMMING = 1,
} AmMetric;

typedef enum AmStatus {
  AM_STATUS_OK = 0,
  AM_STATUS_NULL_POINTER = 1,
  AM_STATUS_INVALID_UTF8 = 2,
  AM_STATUS_INVALID_ARGUMENT = 3,
  AM_STATUS_PARSE = 4,
  AM_STATUS_SIZE_MISMATCH = 5,
  AM_STATUS_RESOURCE_CAP = 6,
  AM_STATUS_IO = 7,
  AM_STATUS_PANIC = 8,
} AmStatus;

/**
 * Opaque election handle.
 */
typedef struct AmElection AmElection;

/**
 * Per-election statistics. `pav_optimal` is 1 when the PAV committee was
 * proved optimal within the budget, 0 otherwise.
 */
typedef struct AmStatistics {
  double max_score;
  size_t cohesiveness_level;
  double cohesive_fraction;
  double pav_runtime_seconds;
  double pav_score;
  int32_t pav_optimal;
} AmStatistics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next library call on this thread.
 */
const char *am_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *am_version(void);

/**
 * Parses the text format: a header line `m n`, then one line per voter.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum AmStatus am_election_from_text(const char *text, struct AmElection **out);

/**
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum AmStatus am_election_from_json(const char *json, struct AmElection **out);

/**
 * Builds an election from ballots in compressed form: voter `v` approves
 * `candidates[offsets[v] .. offsets[v + 1]]`. `offsets` has `n + 1` entries.
 *
 * # Safety
 * `offsets` must hold `n + 1` values and `candidates` at least `offsets[n]`.
 */
enum AmStatus am_election_from_ballots(size_t m,
                                       size_t n,
                                       const size_t *offsets,
                                       const size_t *candidates,
                                       struct AmElection **out);

/**
 * Samples an election from a culture given as JSON, e.g.
 * `{"kind": "resampling", "p": 0.5, "phi": 0.25}`.
 *
 * # Safety
 * `spec_json` must be NUL-terminated; `out` must be writable.
 */
enum AmStatus am_election_sample(const char *spec_json,
                                 size_t m,
                                 size_t n,
                                 uint64_t seed,
                                 struct AmElection **out);

/**
 * Releases an election. Null is ignored.
 *
 * # Safety
 * `e` must come from this library and not be used afterwards.
 */
void am_election_free(struct AmElection *e);

/**
 * # Safety
 * `e` must be a live handle; `m` and `n` must be writable.
 */
enum AmStatus am_election_size(const struct AmElection *e, size_t *m, size_t *n);

/**
 * Serializes to the text format. Free the result with `am_string_free`.
 *
 * # Safety
 * `e` must be a live handle; `out` must be writable.
 */
enum AmStatus am_election_to_text(const struct AmElection *e, char **out);

/**
 * # Safety
 * `s` must come from this library, or be null.
 */
void am_string_free(char *s);

/**
 * Writes the approvalwise vector into `out`, which must hold `len == m` values.
 *
 * # Safety
 * `out` must be writable for `len` doubles.
 */
enum AmStatus am_approvalwise_vector(const struct AmElection *e, double *out, size_t len);

/**
 * Distance between two elections. Isomorphic Hamming returns
 * `AM_STATUS_RESOURCE_CAP` above 10 candidates.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum AmStatus am_distance(const struct AmElection *a,
                          const struct AmElection *b,
                          enum AmMetric metric,
                          double *out);

/**
 * Statistics for committee size `k`, with at most `pav_budget_seconds` for PAV.
 *
 * # Safety
 * `e` must be a live handle; `out` must be writable.
 */
enum AmStatus am_statistics(const struct AmElection *e,
                            size_t k,
                            double pav_budget_seconds,
                            struct AmStatistics *out);

/**
 * Exact PAV committee. Writes `k` ascending candidate indices to `members`.
 * `optimal` (may be null) is set to 0 if the budget ran out first.
 *
 * # Safety
 * `members` must be writable for `k` values; `score` must be writable.
 */
enum AmStatus am_pav_committee(const struct AmElection *e,
                               size_t k,
                               double budget_seconds,
                               size_t *members,
                               double *score,
                               int32_t *optimal);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APPROVALMAP_H */
