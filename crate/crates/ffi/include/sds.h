/* C interface to the sds library: exact-arithmetic social decision schemes,
 * lottery comparison, efficiency verification, and incentive audits.
 */

#ifndef SDS_FFI_H
#define SDS_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call. `SDS_STATUS_OK` covers "the check ran", whether or
 * not the checked property holds — audit outcomes come back through the
 * `holds` out-parameter, not the status.
 */
typedef enum SdsStatus {
  /**
   * The call succeeded and all out-parameters are filled in.
   */
  SDS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SDS_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SDS_STATUS_INVALID_UTF8 = 2,
  /**
   * A profile or lottery literal failed to parse.
   */
  SDS_STATUS_PARSE_ERROR = 3,
  /**
   * A rule spec, extension, level, or property name was not recognized.
   */
  SDS_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The inputs parse but do not fit together (unknown agent, lottery over
   * a different alternative set, audit on a one-agent profile).
   */
  SDS_STATUS_DOMAIN_ERROR = 5,
  /**
   * The operation exceeds a configured resource budget.
   */
  SDS_STATUS_BUDGET_EXCEEDED = 6,
  /**
   * A bug: an invariant failed inside the library.
   */
  SDS_STATUS_INTERNAL_ERROR = 7,
} SdsStatus;

/**
 * A parsed preference profile. Create with [`sds_profile_parse`], release
 * with [`sds_profile_free`].
 */
typedef struct SdsProfile SdsProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a profile literal (one agent per line, `id: best, {tied,...}, worst`)
 * into a handle. On success `*profile_out` owns the profile; release it with
 * `sds_profile_free`.
 */
enum SdsStatus sds_profile_parse(const char *text, struct SdsProfile **profile_out);

/**
 * Release a profile handle. Null is a no-op.
 */
void sds_profile_free(struct SdsProfile *profile);

/**
 * Render the profile back to its canonical literal form.
 */
enum SdsStatus sds_profile_render(const struct SdsProfile *profile, char **text_out);

/**
 * Number of agents and alternatives in the profile.
 */
enum SdsStatus sds_profile_counts(const struct SdsProfile *profile,
                                  uint32_t *agents_out,
                                  uint32_t *alts_out);

/**
 * Run a scheme on the profile. `rule_spec` is `constant`, `rsd`, `pp`, `bo`,
 * `mr`, `esr`, or `sd:1,2,3`. The lottery comes back as an exact rational
 * literal like `a: 1/2, b: 1/2`, re-parseable by the other calls.
 */
enum SdsStatus sds_compute(const struct SdsProfile *profile,
                           const char *rule_spec,
                           char **lottery_out);

/**
 * Rank two lottery literals under a weak-order literal (best class first,
 * e.g. `a, {b,c}, d`). `extension` is `sd` or `dl`; the result is one of
 * `strictly-prefers`, `indifferent`, `strictly-dispreferred`, `incomparable`.
 */
enum SdsStatus sds_compare(const char *order,
                           const char *extension,
                           const char *left,
                           const char *right,
                           char **comparison_out);

/**
 * Check a lottery literal for efficiency on the profile. `property` is
 * `expost` (support is Pareto-optimal) or `sd` (no lottery sd-dominates it).
 * `*efficient_out` gets the verdict and `*report_out` a one-line explanation
 * with the witness when inefficient.
 */
enum SdsStatus sds_verify_efficiency(const struct SdsProfile *profile,
                                     const char *lottery,
                                     const char *property,
                                     bool *efficient_out,
                                     char **report_out);

/**
 * Check one participation notion for one agent: does joining the electorate
 * beat abstaining under the rule? `level` is `participation`, `strong`, or
 * `very-strong`; `extension` is `sd` or `dl`. `*holds_out` gets the verdict
 * and `*report_out` both lotteries and the comparison.
 */
enum SdsStatus sds_audit_participation(const struct SdsProfile *profile,
                                       const char *rule_spec,
                                       uint32_t agent,
                                       const char *level,
                                       const char *extension,
                                       bool *holds_out,
                                       char **report_out);

/**
 * Check one agent's incentive to misreport: enumerate every weak order over
 * the alternatives and compare each outcome against the truthful one under
 * the agent's true order. `*holds_out` is true when no misreport is strictly
 * better; the report names a beneficial misreport when one exists.
 */
enum SdsStatus sds_audit_strategyproofness(const struct SdsProfile *profile,
                                           const char *rule_spec,
                                           uint32_t agent,
                                           const char *extension,
                                           bool *holds_out,
                                           char **report_out);

/**
 * Free a string returned through any `*_out` parameter. Null is a no-op.
 */
void sds_string_free(char *text);

/**
 * Message from the most recent failing call on this thread, or null if none
 * has failed yet. The pointer is owned by the library and stays valid until
 * the next failing call on the same thread; do not free it.
 */
const char *sds_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDS_FFI_H */
