#ifndef MEDSIMP_H
#define MEDSIMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MedsimpStatus {
  MEDSIMP_STATUS_OK = 0,
  MEDSIMP_STATUS_NULL_POINTER = 1,
  MEDSIMP_STATUS_INVALID_UTF8 = 2,
  MEDSIMP_STATUS_IO = 3,
  MEDSIMP_STATUS_PARSE = 4,
  MEDSIMP_STATUS_INVALID_ARGUMENT = 5,
  MEDSIMP_STATUS_PANIC = 6,
} MedsimpStatus;

/**
 * Word frequency table handle.
 */
typedef struct MedsimpFreq MedsimpFreq;

/**
 * Language model handle (ARPA model or score table).
 */
typedef struct MedsimpLm MedsimpLm;

/**
 * Phrase table handle.
 */
typedef struct MedsimpTable MedsimpTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *medsimp_last_error(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void medsimp_string_free(char *s);

/**
 * Load a phrase table written by `medsimp build-table`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MedsimpStatus medsimp_table_load(const char *path, struct MedsimpTable **out);

/**
 * Align ontology TSV files (`concept_id, label, source, P|A`) into a table.
 *
 * # Safety
 * `paths` must point to `n` NUL-terminated strings and `out` must be valid.
 */
enum MedsimpStatus medsimp_table_from_ontologies(const char *const *paths,
                                                 size_t n,
                                                 bool pluralize,
                                                 struct MedsimpTable **out);

/**
 * Number of alternative groups in the table; 0 for null.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t medsimp_table_len(const struct MedsimpTable *table);

/**
 * # Safety
 * `table` must be null or a handle not yet freed.
 */
void medsimp_table_free(struct MedsimpTable *table);

/**
 * Load an ARPA model or a `sentence<TAB>score` table.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MedsimpStatus medsimp_lm_load(const char *path, struct MedsimpLm **out);

/**
 * Mean natural-log probability per token of `sentence`.
 *
 * # Safety
 * `model` must be a live handle, `sentence` NUL-terminated, `out` valid.
 */
enum MedsimpStatus medsimp_lm_score(const struct MedsimpLm *model,
                                    const char *sentence,
                                    double *out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void medsimp_lm_free(struct MedsimpLm *model);

/**
 * Load `word<TAB>probability` rows.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MedsimpStatus medsimp_freq_load(const char *path, struct MedsimpFreq **out);

/**
 * Minimum over the words of `term` of ln(P(word) + 1e-10).
 *
 * # Safety
 * `freq` must be a live handle, `term` NUL-terminated, `out` valid.
 */
enum MedsimpStatus medsimp_freq_wf(const struct MedsimpFreq *freq, const char *term, double *out);

/**
 * # Safety
 * `freq` must be null or a handle not yet freed.
 */
void medsimp_freq_free(struct MedsimpFreq *freq);

/**
 * Simplify one sentence. On success `*out` holds a new string (release it
 * with `medsimp_string_free`) and `*iterations` the number of passes that
 * changed the sentence.
 *
 * # Safety
 * Handles must be live, `sentence` NUL-terminated, `out` and `iterations` valid.
 */
enum MedsimpStatus medsimp_simplify(const struct MedsimpTable *table,
                                    const struct MedsimpLm *model,
                                    const struct MedsimpFreq *freq,
                                    const char *sentence,
                                    double alpha,
                                    uint32_t max_iterations,
                                    char **out,
                                    uint32_t *iterations);

/**
 * `(S - F) / (S + F + E + N + U)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MedsimpStatus medsimp_simplification_gain(uint64_t s,
                                               uint64_t f,
                                               uint64_t e,
                                               uint64_t n,
                                               uint64_t u,
                                               double *out);

/**
 * Sentence SARI (0 to 100) against `n_refs` references.
 *
 * # Safety
 * Strings must be NUL-terminated; `refs` must point to `n_refs` strings.
 */
enum MedsimpStatus medsimp_sari(const char *source,
                                const char *output,
                                const char *const *refs,
                                size_t n_refs,
                                double *out);

/**
 * Corpus BLEU (0 to 100) over `n` output/reference pairs.
 *
 * # Safety
 * `outputs` and `refs` must each point to `n` NUL-terminated strings.
 */
enum MedsimpStatus medsimp_bleu(const char *const *outputs,
                                const char *const *refs,
                                size_t n,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEDSIMP_H */
