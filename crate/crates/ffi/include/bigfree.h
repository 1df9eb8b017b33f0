#ifndef BIGFREE_H
#define BIGFREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Property holds for every point.
 */
#define BF_VERIFIED 0

/**
 * Property fails; a witness exists.
 */
#define BF_REFUTED 1

/**
 * The analysis was inconclusive within the budget.
 */
#define BF_UNKNOWN 2

/**
 * Generic error; see `bf_last_error`.
 */
#define BF_ERR -1

/**
 * A required pointer argument was null.
 */
#define BF_ERR_NULL -2

/**
 * The computation budget was exhausted.
 */
#define BF_ERR_BUDGET -3

/**
 * Opaque handle to a parsed word.
 */
typedef struct BfWord BfWord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a word from its textual form.
 *
 * Returns null on failure; call `bf_last_error` for the message. The handle
 * must be released with `bf_word_free`.
 */
struct BfWord *bf_word_parse(const char *text);

/**
 * Releases a word handle. Null is accepted and ignored.
 */
void bf_word_free(struct BfWord *word);

/**
 * Renders a word back to its textual form.
 *
 * Returns a heap string that must be released with `bf_string_free`, or null
 * if the handle is null.
 */
char *bf_word_print(const struct BfWord *word);

/**
 * Releases a string returned by this library.
 */
void bf_string_free(char *s);

/**
 * Checks admissibility of a transposition word.
 *
 * With `prime` zero the two-sided finite-chain condition is checked; with
 * `prime` nonzero the stricter one-sided variant is checked. Test points
 * are sampled from [-10, 10]. Returns `BF_VERIFIED`, `BF_REFUTED`,
 * `BF_UNKNOWN`, or a negative error code.
 */
int32_t bf_check_sigma(const struct BfWord *word, int32_t prime, uint64_t budget);

/**
 * Checks admissibility of a Nielsen word: bounded head occurrences and no
 * infinite forward chain in the word or its formal inverse.
 *
 * Returns `BF_VERIFIED`, `BF_REFUTED`, `BF_UNKNOWN`, or a negative error
 * code.
 */
int32_t bf_check_aut(const struct BfWord *word);

/**
 * Evaluates the permutation realized by a transposition word at one point,
 * writing the image to `out`.
 *
 * Returns `BF_VERIFIED` on success or a negative error code.
 */
int32_t bf_eval_perm_point(const struct BfWord *word, int64_t point, uint64_t budget, int64_t *out);

/**
 * Returns the message for the most recent failure on this thread.
 *
 * The pointer stays valid until the next failing call on the same thread.
 * Returns an empty string if no failure has occurred.
 */
const char *bf_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIGFREE_H */
