#ifndef CCD_H
#define CCD_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CcdStatus {
  CCD_STATUS_OK = 0,
  CCD_STATUS_PARSE = 1,
  CCD_STATUS_MALFORMED_TREE = 2,
  CCD_STATUS_TAXON = 3,
  CCD_STATUS_EMPTY_INPUT = 4,
  CCD_STATUS_DEGENERATE_MODEL = 5,
  CCD_STATUS_STRUCTURAL_VIOLATION = 6,
  CCD_STATUS_REJECTION_BUDGET_EXCEEDED = 7,
  CCD_STATUS_MANIFEST = 8,
  CCD_STATUS_INVALID_ARGUMENT = 9,
  CCD_STATUS_FORMAT = 10,
  CCD_STATUS_IO = 11,
  CCD_STATUS_NULL_POINTER = 12,
  CCD_STATUS_INVALID_UTF8 = 13,
  CCD_STATUS_PANIC = 14,
} CcdStatus;

typedef enum CcdModel {
  CCD_MODEL_CCD0 = 0,
  CCD_MODEL_CCD1 = 1,
  CCD_MODEL_CCD2 = 2,
} CcdModel;

/**
 * Clade/split-based credible CCD annotation.
 */
typedef struct CcdCredibleCcd CcdCredibleCcd;

/**
 * Frequency-based credible-set index.
 */
typedef struct CcdFrequencyIndex CcdFrequencyIndex;

/**
 * A built CCD.
 */
typedef struct CcdGraph CcdGraph;

/**
 * Probability-based credible-set index.
 */
typedef struct CcdProbabilityIndex CcdProbabilityIndex;

/**
 * Random stream seeded from a 64-bit seed.
 */
typedef struct CcdRng CcdRng;

/**
 * A tree sample.
 */
typedef struct CcdSample CcdSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty when none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ccd_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ccd_string_free(char *s);

/**
 * Reads a tree sample (Newick lines or Nexus) from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CcdStatus ccd_sample_read_file(const char *path, double burnin, struct CcdSample **out);

/**
 * Parses a tree sample from text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CcdStatus ccd_sample_parse(const char *text, double burnin, struct CcdSample **out);

/**
 * Number of trees in the sample, or 0 for NULL.
 *
 * # Safety
 * `sample` must be NULL or a live handle.
 */
size_t ccd_sample_len(const struct CcdSample *sample);

/**
 * # Safety
 * `sample` must be NULL or a live handle; it is invalid afterwards.
 */
void ccd_sample_free(struct CcdSample *sample);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum CcdStatus ccd_rng_new(uint64_t seed, struct CcdRng **out);

/**
 * # Safety
 * `rng` must be NULL or a live handle; it is invalid afterwards.
 */
void ccd_rng_free(struct CcdRng *rng);

/**
 * Builds a CCD of the given model from a sample.
 *
 * # Safety
 * `sample` must be a live handle and `out` a valid pointer.
 */
enum CcdStatus ccd_graph_build(const struct CcdSample *sample,
                               enum CcdModel model,
                               struct CcdGraph **out);

/**
 * Reads a CCD from its text serialisation.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CcdStatus ccd_graph_read(const char *text, struct CcdGraph **out);

/**
 * Text serialisation of a CCD; free the result with `ccd_string_free`.
 *
 * # Safety
 * `graph` must be a live handle and `out` a valid pointer.
 */
enum CcdStatus ccd_graph_write(const struct CcdGraph *graph, char **out);

/**
 * # Safety
 * `graph` must be NULL or a live handle; it is invalid afterwards.
 */
void ccd_graph_free(struct CcdGraph *graph);

/**
 * Probability of a Newick tree under the CCD; 0 if the CCD lacks it.
 *
 * # Safety
 * Pointers must be valid; `newick` NUL-terminated.
 */
enum CcdStatus ccd_graph_tree_probability(const struct CcdGraph *graph,
                                          const char *newick,
                                          double *out);

/**
 * Maximum-probability tree as Newick and its probability.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_graph_map_tree(const struct CcdGraph *graph,
                                  char **out_newick,
                                  double *out_probability);

/**
 * Draws one tree from the CCD.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_graph_sample_tree(const struct CcdGraph *graph,
                                     struct CcdRng *rng,
                                     char **out_newick);

/**
 * Probability that a tree from the CCD contains the clade of the
 * `n_labels` given taxon labels.
 *
 * # Safety
 * `labels` must point to `n_labels` NUL-terminated strings.
 */
enum CcdStatus ccd_graph_clade_probability(const struct CcdGraph *graph,
                                           const char *const *labels,
                                           size_t n_labels,
                                           double *out);

/**
 * Rooted Robinson-Foulds distance between two Newick trees on the same taxa.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum CcdStatus ccd_rooted_rf(const char *newick_a, const char *newick_b, size_t *out);

/**
 * Central binomial interval holding at least `mass` probability.
 *
 * # Safety
 * Out pointers must be valid.
 */
enum CcdStatus ccd_binomial_interval(uint64_t trials,
                                     double p,
                                     double mass,
                                     uint64_t *out_lo,
                                     uint64_t *out_hi);

/**
 * Frequency index over a sample with a uniform level grid of `grid_step`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_frequency_index_build(const struct CcdSample *sample,
                                         double grid_step,
                                         struct CcdFrequencyIndex **out);

/**
 * Credible level of a Newick tree (`INFINITY` if outside every set).
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_frequency_index_level(const struct CcdFrequencyIndex *index,
                                         const char *newick,
                                         double *out);

/**
 * # Safety
 * `index` must be NULL or a live handle; it is invalid afterwards.
 */
void ccd_frequency_index_free(struct CcdFrequencyIndex *index);

/**
 * Probability index from `k` trees drawn from the CCD.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_probability_index_build(const struct CcdGraph *graph,
                                           size_t k,
                                           double grid_step,
                                           struct CcdRng *rng,
                                           struct CcdProbabilityIndex **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_probability_index_level(const struct CcdProbabilityIndex *index,
                                           const char *newick,
                                           double *out);

/**
 * Draws a tree from the CCD restricted to the `alpha` credible set.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_probability_index_sample(const struct CcdProbabilityIndex *index,
                                            double alpha,
                                            struct CcdRng *rng,
                                            char **out_newick);

/**
 * # Safety
 * `index` must be NULL or a live handle; it is invalid afterwards.
 */
void ccd_probability_index_free(struct CcdProbabilityIndex *index);

/**
 * Runs the greedy removal and annotates clades and splits with levels.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_credible_ccd_build(const struct CcdGraph *graph, struct CcdCredibleCcd **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_credible_ccd_level(const struct CcdCredibleCcd *index,
                                      const char *newick,
                                      double *out);

/**
 * The credible CCD at level `alpha` as a new CCD handle.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CcdStatus ccd_credible_ccd_materialize(const struct CcdCredibleCcd *index,
                                            double alpha,
                                            struct CcdGraph **out);

/**
 * # Safety
 * `index` must be NULL or a live handle; it is invalid afterwards.
 */
void ccd_credible_ccd_free(struct CcdCredibleCcd *index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCD_H */
