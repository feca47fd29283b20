#ifndef LTL_WORKBENCH_H
#define LTL_WORKBENCH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LtlStatus {
  LTL_STATUS_OK = 0,
  LTL_STATUS_NULL_ARGUMENT = 1,
  LTL_STATUS_INVALID_UTF8 = 2,
  LTL_STATUS_PARSE_ERROR = 3,
  LTL_STATUS_INVALID_MODEL = 4,
  LTL_STATUS_INVALID_POLICY = 5,
  LTL_STATUS_AUTOMATON_TOO_LARGE = 6,
  LTL_STATUS_ALPHABET_MISMATCH = 7,
  LTL_STATUS_INTERNAL = 8,
} LtlStatus;

/**
 * A parsed formula with its alphabet.
 */
typedef struct LtlFormula LtlFormula;

/**
 * A labeled MDP.
 */
typedef struct LtlModel LtlModel;

/**
 * A finite-memory policy bound to the model it was loaded against.
 */
typedef struct LtlPolicy LtlPolicy;

/**
 * Membership of a formula in the temporal hierarchy classes.
 */
typedef struct LtlClassification {
  bool guarantee;
  bool safety;
  bool finitary;
  /**
   * Decision horizon of a finitary formula, otherwise -1.
   */
  int64_t horizon;
} LtlClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or an empty string.
 */
const char *ltl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ltl_version(void);

/**
 * Parses `text`. `atoms` is a comma-separated atom order, or null to use
 * the formula's atoms in sorted order.
 *
 * # Safety
 * String arguments are null or NUL-terminated; `out` is null or writable.
 */
enum LtlStatus ltl_formula_parse(const char *text, const char *atoms, struct LtlFormula **out);

/**
 * # Safety
 * `f` is null or a formula from [`ltl_formula_parse`] not yet freed.
 */
void ltl_formula_free(struct LtlFormula *f);

/**
 * # Safety
 * `f` is null or a live formula; `out` is null or writable.
 */
enum LtlStatus ltl_formula_classify(const struct LtlFormula *f, struct LtlClassification *out);

/**
 * Loads a model from its JSON text.
 *
 * # Safety
 * `json` is null or NUL-terminated; `out` is null or writable.
 */
enum LtlStatus ltl_model_from_json(const char *json, struct LtlModel **out);

/**
 * # Safety
 * `m` is null or a model from [`ltl_model_from_json`] not yet freed.
 */
void ltl_model_free(struct LtlModel *m);

/**
 * Number of states of `m`, or 0 when `m` is null.
 *
 * # Safety
 * `m` is null or a live model.
 */
size_t ltl_model_num_states(const struct LtlModel *m);

/**
 * Loads a policy for `model` from its JSON text.
 *
 * # Safety
 * `model` is null or live; `json` is null or NUL-terminated; `out` is null
 * or writable.
 */
enum LtlStatus ltl_policy_from_json(const struct LtlModel *model,
                                    const char *json,
                                    struct LtlPolicy **out);

/**
 * # Safety
 * `p` is null or a policy from this library not yet freed.
 */
void ltl_policy_free(struct LtlPolicy *p);

/**
 * Maximal probability of satisfying `f` on `model`. When `policy_out` is
 * not null it receives a policy attaining the optimum.
 *
 * # Safety
 * Handles are null or live; `value` is null or writable; `policy_out` is
 * null or writable.
 */
enum LtlStatus ltl_optimal_value(const struct LtlModel *model,
                                 const struct LtlFormula *f,
                                 double *value,
                                 struct LtlPolicy **policy_out);

/**
 * Probability that `policy` satisfies `f` on `model`.
 *
 * # Safety
 * Handles are null or live and `policy` was loaded against `model`;
 * `value` is null or writable.
 */
enum LtlStatus ltl_policy_value(const struct LtlModel *model,
                                const struct LtlFormula *f,
                                const struct LtlPolicy *policy,
                                double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LTL_WORKBENCH_H */
