#ifndef SELEXP_H
#define SELEXP_H

/* Generated by cbindgen from selexp-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every C API call.
 */
typedef enum {
  SELEXP_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  SELEXP_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  SELEXP_STATUS_INVALID_UTF8 = 2,
  /**
   * Invalid configuration (bad parameter values).
   */
  SELEXP_STATUS_CONFIG_ERROR = 3,
  /**
   * Invalid or inconsistent input data.
   */
  SELEXP_STATUS_DATA_ERROR = 4,
  /**
   * A named kind, user, or page does not exist.
   */
  SELEXP_STATUS_NOT_FOUND = 5,
  /**
   * Filesystem failure.
   */
  SELEXP_STATUS_IO_ERROR = 6,
  /**
   * Internal panic; state is unspecified but memory-safe.
   */
  SELEXP_STATUS_PANIC = 7,
} SelexpStatus;

/**
 * Per-user activity distribution selector for synthetic cohorts.
 */
typedef enum {
  /**
   * Every user makes exactly `activity_min` interactions.
   */
  SELEXP_ACTIVITY_KIND_FIXED = 0,
  /**
   * Uniform on [activity_min, activity_max].
   */
  SELEXP_ACTIVITY_KIND_UNIFORM = 1,
  /**
   * p(n) proportional to n^(-activity_exponent) on [min, max].
   */
  SELEXP_ACTIVITY_KIND_POWER_LAW = 2,
} SelexpActivityKind;

/**
 * Opaque immutable interaction table.
 */
typedef struct SelexpTable SelexpTable;

/**
 * Synthetic cohort parameters; see `selexp_table_synth`.
 */
typedef struct {
  uint64_t users;
  /**
   * Number of bias labels; 0 selects the default five-label scheme.
   */
  uint32_t labels;
  uint32_t pages_per_label;
  SelexpActivityKind activity_kind;
  /**
   * Power-law exponent; ignored for fixed and uniform activity.
   */
  double activity_exponent;
  uint64_t activity_min;
  /**
   * Ignored for fixed activity.
   */
  uint64_t activity_max;
  /**
   * Probability an interaction targets the user's home label, in [1/K, 1].
   */
  double bias_affinity;
  /**
   * Page-taste concentration; 1 = uniform, larger = fewer favorites.
   */
  double page_loyalty;
  uint64_t seed;
} SelexpSynthSpec;

/**
 * Per-user selectivity record.
 */
typedef struct {
  /**
   * Total interactions of the requested kind.
   */
  uint64_t n;
  /**
   * Distinct pages touched.
   */
  uint64_t distinct_pages;
  /**
   * Bias entropy in nats.
   */
  double bias_entropy;
  /**
   * Bias entropy divided by ln(K); in [0, 1].
   */
  double bias_entropy_norm;
  /**
   * Page entropy in nats.
   */
  double page_entropy;
  /**
   * Theoretical minimum page entropy given the per-class totals.
   */
  double min_bound;
  /**
   * Theoretical maximum page entropy given the per-class totals.
   */
  double max_bound;
  /**
   * Scaled selectivity statistic in [0, 1]; NaN when `has_x` is false.
   */
  double x;
  bool has_x;
  /**
   * Bounds coincide; the user carries no within-class information.
   */
  bool degenerate_bounds;
  bool meets_activity_threshold;
  bool multi_page;
  /**
   * Modal leaning as a scheme index, or -1 when unresolved.
   */
  int32_t leaning;
} SelexpEntropyRecord;

/**
 * Experiment knobs for `selexp_run_experiment`; get defaults from
 * `selexp_experiment_config_default`.
 */
typedef struct {
  /**
   * Activity threshold; inclusive unless `strict_threshold`.
   */
  uint64_t activity_threshold;
  bool strict_threshold;
  /**
   * Restrict the weak benchmark to users touching at least two pages.
   */
  bool multi_page_only;
  uint64_t seed;
  uint32_t replicates;
  /**
   * Fraction of eligible users sampled for the weak benchmark, in (0, 1].
   */
  double sample_fraction;
  uint32_t kl_bins;
  double pseudocount;
  uint32_t activity_bins;
  /**
   * Average per-replicate KL instead of pooling replicate values.
   */
  bool averaged_estimator;
  /**
   * Also write one CSV file per report table.
   */
  bool write_csv;
} SelexpExperimentConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Human-readable message of the most recent failure on this thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *selexp_last_error_message(void);

/**
 * Library version string.
 */
const char *selexp_version(void);

/**
 * Ingests an interaction log and a page-label file.
 *
 * `scheme` may be NULL for the default five-label scheme, otherwise it
 * names a file with one ordered label per line. On success `*out` owns a
 * new table handle.
 *
 * # Safety
 * String arguments must be NULL or valid NUL-terminated strings; `out`
 * must be a valid pointer.
 */
SelexpStatus selexp_table_ingest(const char *interactions,
                                 const char *pages,
                                 const char *scheme,
                                 char separator,
                                 bool lenient,
                                 SelexpTable **out);

/**
 * Generates a synthetic cohort table; `kind` may be NULL for `like`.
 *
 * # Safety
 * `spec` and `out` must be valid pointers; `kind` NULL or a valid string.
 */
SelexpStatus selexp_table_synth(const SelexpSynthSpec *spec, const char *kind, SelexpTable **out);

/**
 * Releases a table handle. NULL is a no-op.
 *
 * # Safety
 * `table` must be NULL or a handle produced by this library, freed once.
 */
void selexp_table_free(SelexpTable *table);

/**
 * Reads the table dimensions.
 *
 * # Safety
 * Pointer arguments must be valid or NULL (NULL outputs are skipped).
 */
SelexpStatus selexp_table_counts(const SelexpTable *table,
                                 uint64_t *out_users,
                                 uint64_t *out_pages,
                                 uint32_t *out_labels);

/**
 * Merged-edge and interaction totals for one kind.
 *
 * # Safety
 * Pointer arguments must be valid; `kind` a valid string.
 */
SelexpStatus selexp_table_kind_stats(const SelexpTable *table,
                                     const char *kind,
                                     uint64_t *out_edges,
                                     uint64_t *out_interactions);

/**
 * Writes the table back out in the ingestion file formats.
 *
 * # Safety
 * Pointer arguments must be valid strings.
 */
SelexpStatus selexp_table_write(const SelexpTable *table,
                                const char *interactions,
                                const char *pages,
                                char separator);

/**
 * Strong randomization of one kind: interactions re-paired uniformly,
 * preserving user and page totals. `*out` owns a new handle.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
SelexpStatus selexp_strong_randomize(const SelexpTable *table,
                                     const char *kind,
                                     uint64_t seed,
                                     SelexpTable **out);

/**
 * Weak randomization: bias labels permuted across pages, edges unchanged.
 * `*out` owns a new handle.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
SelexpStatus selexp_weak_randomize(const SelexpTable *table, uint64_t seed, SelexpTable **out);

/**
 * Computes one user's selectivity record for a kind.
 *
 * `min_interactions` only feeds the `meets_activity_threshold` flag.
 * Returns `SELEXP_STATUS_NOT_FOUND` when the user is unknown or has no
 * interactions of that kind.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
SelexpStatus selexp_user_entropy(const SelexpTable *table,
                                 const char *kind,
                                 const char *user,
                                 uint64_t min_interactions,
                                 SelexpEntropyRecord *out);

/**
 * Default experiment configuration (threshold 5, 100 replicates, 2%
 * sample, 50 KL bins, pseudocount 0.5, 12 activity bins, pooled
 * estimator).
 */
SelexpExperimentConfig selexp_experiment_config_default(void);

/**
 * Runs all four analysis sections on the table and writes `report.txt`
 * (plus per-table CSVs when configured) under `out_dir`.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
SelexpStatus selexp_run_experiment(const SelexpTable *table,
                                   const char *kind,
                                   const SelexpExperimentConfig *config,
                                   const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELEXP_H */
