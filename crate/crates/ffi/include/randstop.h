#ifndef RANDSTOP_H
#define RANDSTOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RS_METHOD_BACKWARD 0

#define RS_METHOD_FORWARD 1

#define RS_LINK_LOGISTIC 0

#define RS_LINK_GUMBEL 1

#define RS_MODE_EXPECTATION 0

#define RS_MODE_SAMPLED 1

#define RS_MODE_HARD 2

/**
 * Status codes returned by every fallible function.
 */
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RS_STATUS_NULL_POINTER = 1,
  /**
   * Invalid model, policy document or option value.
   */
  RS_STATUS_CONFIG = 2,
  /**
   * Non-finite values during fitting or estimation.
   */
  RS_STATUS_NUMERIC = 3,
  /**
   * Arguments inconsistent with each other (dimensions, dates).
   */
  RS_STATUS_ARGUMENT = 4,
  RS_STATUS_IO = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  RS_STATUS_PANIC = 6,
} RsStatus;

/**
 * Opaque market handle.
 */
typedef struct RsMarket RsMarket;

/**
 * Opaque policy handle.
 */
typedef struct RsPolicy RsPolicy;

/**
 * Scalar market parameters. Initial prices are passed separately.
 */
typedef struct RsMarketParams {
  double strike;
  double rate;
  double dividend;
  double vol;
  double maturity;
  /**
   * Number of exercise intervals; dates are `j * maturity / num_dates`.
   */
  size_t num_dates;
} RsMarketParams;

/**
 * Fitting options. Zero (or non-positive) optimizer entries select the
 * method's defaults.
 */
typedef struct RsFitOptions {
  /**
   * `RS_METHOD_BACKWARD` or `RS_METHOD_FORWARD`.
   */
  uint32_t method;
  /**
   * `RS_LINK_LOGISTIC` or `RS_LINK_GUMBEL`.
   */
  uint32_t link;
  uint32_t degree;
  size_t train_paths;
  uint64_t train_seed;
  uint64_t optimizer_seed;
  double step_size;
  size_t max_iters;
  size_t restarts;
} RsFitOptions;

/**
 * A Monte Carlo price with its standard error and 95% interval.
 */
typedef struct RsEstimate {
  double estimate;
  double std_error;
  double ci_low;
  double ci_high;
  size_t num_paths;
} RsEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last error on this thread, or null after a
 * successful call. The string stays valid until the next `rs_*` call on
 * the same thread.
 */
const char *rs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * Creates a market with `dim` assets.
 *
 * # Safety
 * `params` must point to a valid `RsMarketParams`, `spot` to `dim`
 * readable doubles and `out` to writable storage for one handle.
 */
enum RsStatus rs_market_new(const struct RsMarketParams *params,
                            const double *spot,
                            size_t dim,
                            struct RsMarket **out);

/**
 * Releases a market. Null is ignored.
 *
 * # Safety
 * `market` must be null or a handle from `rs_market_new` not yet freed.
 */
void rs_market_free(struct RsMarket *market);

/**
 * Simulates training paths and fits a policy.
 *
 * # Safety
 * `market` must be a live market handle, `options` a valid pointer and
 * `out` writable storage for one handle.
 */
enum RsStatus rs_fit(const struct RsMarket *market,
                     const struct RsFitOptions *options,
                     struct RsPolicy **out);

/**
 * Releases a policy. Null is ignored.
 *
 * # Safety
 * `policy` must be null or a handle from `rs_fit` or
 * `rs_policy_from_json` not yet freed.
 */
void rs_policy_free(struct RsPolicy *policy);

/**
 * Serializes a policy to JSON. Free the string with `rs_string_free`.
 *
 * # Safety
 * `policy` must be a live policy handle and `out` writable storage for
 * one pointer.
 */
enum RsStatus rs_policy_to_json(const struct RsPolicy *policy, char **out);

/**
 * Parses a policy JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable storage for
 * one handle.
 */
enum RsStatus rs_policy_from_json(const char *json, struct RsPolicy **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from `rs_policy_to_json` not yet freed.
 */
void rs_string_free(char *s);

/**
 * Exercise probability of `policy` at date index `date` for a state of
 * `len` log-prices observed at time `t`.
 *
 * # Safety
 * `policy` must be a live policy handle, `state` must point to `len`
 * readable doubles and `out` to one writable double.
 */
enum RsStatus rs_policy_eval_h(const struct RsPolicy *policy,
                               size_t date,
                               const double *state,
                               size_t len,
                               double t,
                               double *out);

/**
 * Low-biased price of `policy` on `num_paths` fresh paths.
 *
 * # Safety
 * `market` and `policy` must be live handles and `out` writable.
 */
enum RsStatus rs_estimate(const struct RsMarket *market,
                          const struct RsPolicy *policy,
                          size_t num_paths,
                          uint64_t seed,
                          uint32_t mode,
                          struct RsEstimate *out);

/**
 * Price of exercising only at maturity.
 *
 * # Safety
 * `market` must be a live handle and `out` writable.
 */
enum RsStatus rs_european_reference(const struct RsMarket *market,
                                    size_t num_paths,
                                    uint64_t seed,
                                    struct RsEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANDSTOP_H */
