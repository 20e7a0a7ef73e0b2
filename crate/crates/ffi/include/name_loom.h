#ifndef NAME_LOOM_H
#define NAME_LOOM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum NlStatus {
  NL_STATUS_OK = 0,
  NL_STATUS_NULL_ARGUMENT = 1,
  NL_STATUS_INVALID_UTF8 = 2,
  NL_STATUS_MISSING_DIR = 3,
  NL_STATUS_EMPTY_CORPUS = 4,
  NL_STATUS_IO = 5,
  NL_STATUS_INDEX_FORMAT = 6,
  NL_STATUS_PARSE = 7,
  NL_STATUS_INVALID_CONFIG = 8,
  NL_STATUS_PANIC = 9,
} NlStatus;

// Opaque corpus index handle.
typedef struct NlIndex NlIndex;

// Recovery parameters. Start from [`nl_config_default`].
typedef struct NlConfig {
  double phi;
  uint32_t beam_k;
  uint32_t assoc_j;
  double alpha;
  double beta;
  double gamma;
  double theta;
  uint32_t c_max;
  // Non-zero matches function names by tokens instead of in full.
  uint8_t tsc_tokenized;
  uint64_t seed;
} NlConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default recovery parameters.
struct NlConfig nl_config_default(void);

// Library version, a static string.
const char *nl_version(void);

// Message for the last failed call on this thread, or null. Valid until the
// next library call on the same thread.
const char *nl_last_error(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void nl_string_free(char *s);

// Builds an index from every `.js` file below `corpus_dir`.
//
// # Safety
// `corpus_dir` must be a valid C string and `out` a valid pointer.
enum NlStatus nl_index_build(const char *corpus_dir, struct NlIndex **out);

// Loads an index saved with [`nl_index_save`].
//
// # Safety
// `dir` must be a valid C string and `out` a valid pointer.
enum NlStatus nl_index_load(const char *dir, struct NlIndex **out);

// Writes the index into `dir`, creating it if needed.
//
// # Safety
// `index` must be a live handle and `dir` a valid C string.
enum NlStatus nl_index_save(const struct NlIndex *index, const char *dir);

// Releases an index handle. Null is ignored.
//
// # Safety
// `index` must come from this library and not be freed twice.
void nl_index_free(struct NlIndex *index);

// Jaccard association between a variable name and a function name. Unknown
// names score 0.
//
// # Safety
// Pointers must be valid; strings NUL-terminated.
enum NlStatus nl_index_task_score(const struct NlIndex *index,
                                  const char *name,
                                  const char *function_name,
                                  double *out);

// Fraction of functions containing any of `names` that contain all of them.
// Any unknown name gives 0.
//
// # Safety
// `names` must point to `len` valid C strings.
enum NlStatus nl_index_assoc(const struct NlIndex *index,
                             const char *const *names,
                             size_t len,
                             double *out);

// Recovers variable names in `source`. `config` may be null for defaults.
// `out_report` may be null; otherwise it receives the JSON report.
//
// # Safety
// Pointers must be valid; outputs are released with [`nl_string_free`].
enum NlStatus nl_recover(const struct NlIndex *index,
                         const char *source,
                         const struct NlConfig *config,
                         char **out_source,
                         char **out_report);

// Renames every local to a short name. `out_truth` may be null; otherwise
// it receives the JSON ground truth.
//
// # Safety
// Pointers must be valid; outputs are released with [`nl_string_free`].
enum NlStatus nl_minify(const char *source, uint64_t seed, char **out_source, char **out_truth);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NAME_LOOM_H */
