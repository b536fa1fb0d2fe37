/* C interface for the chainsparse library.
 *
 * Maintained by hand alongside src/lib.rs; the crate's test suite checks
 * that every exported symbol is declared here.
 *
 * Conventions:
 *   - every fallible function returns a ChsStatus; outputs go through
 *     pointer parameters;
 *   - objects returned through ChsCode** / ChsWeights** are released with
 *     the matching chs_*_free;
 *   - strings returned by the library are UTF-8, NUL-terminated, and freed
 *     with chs_string_free;
 *   - chs_last_error_message() describes the most recent failure on the
 *     calling thread (do not free).
 */

#ifndef CHAINSPARSE_H
#define CHAINSPARSE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ChsStatus {
  CHS_OK = 0,
  CHS_VERIFY_FAIL = 1,
  CHS_INVALID_INPUT = 2,
  CHS_BUDGET_EXHAUSTED = 3,
  CHS_NULL_POINTER = 4,
  CHS_INTERNAL = 5,
} ChsStatus;

/* Opaque handles. */
typedef struct ChsCode ChsCode;
typedef struct ChsWeights ChsWeights;

const char *chs_last_error_message(void);
void chs_string_free(char *s);

/* Codes are exchanged as JSON: {"m": int, "words": ["0101", ...]}, where
 * coordinate 1 is the leftmost character of each word. */
ChsStatus chs_code_parse_json(const char *json, ChsCode **out);
void chs_code_free(ChsCode *code);
int chs_code_m(const ChsCode *code);
int chs_code_word_count(const ChsCode *code);

/* Weights are exchanged as JSON: {"m": int, "weights": [double, ...]}. */
ChsStatus chs_weights_parse_json(const char *json, ChsWeights **out);
ChsStatus chs_weights_to_json(const ChsWeights *weights, char **out);
void chs_weights_free(ChsWeights *weights);
int chs_weights_support_size(const ChsWeights *weights);

/* Exact structural metrics. `budget` caps the branch-and-bound node count;
 * CHS_BUDGET_EXHAUSTED reports exhaustion. */
ChsStatus chs_chain_length(const ChsCode *code, uint64_t budget, int *out_value);
ChsStatus chs_nrd(const ChsCode *code, uint64_t budget, int *out_value);
ChsStatus chs_density_exact(const ChsCode *code, double *out_phi);

/* Sparsifiers. `mode` is 0 for the theory constants and 1 for the practical
 * ones; `cl_bound < 0` means no caller-supplied chain-length bound;
 * `q <= 0` selects the mode's default pass constant. Outputs are verified
 * exhaustively before they are returned. */
ChsStatus chs_sparsify(const ChsCode *code, double epsilon, int mode,
                       uint64_t seed, int64_t cl_bound, ChsWeights **out);
ChsStatus chs_sparsify_weighted(const ChsCode *code, const ChsWeights *weights,
                                double epsilon, int mode, uint64_t seed,
                                int64_t cl_bound, ChsWeights **out);
ChsStatus chs_sparsify_dimension_free(const ChsCode *code,
                                      const ChsWeights *weights,
                                      double epsilon, int mode, uint64_t seed,
                                      int64_t cl_bound, double q,
                                      ChsWeights **out);

/* Sparsifier contract check; `original` may be NULL for unit weights.
 * CHS_OK on pass, CHS_VERIFY_FAIL on a clean fail. */
ChsStatus chs_verify(const ChsCode *code, const ChsWeights *original,
                     const ChsWeights *tilde, double epsilon,
                     double *out_max_deviation);

#ifdef __cplusplus
}
#endif

#endif /* CHAINSPARSE_H */
