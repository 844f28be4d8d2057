/*
 * softpg - soft (entropy-regularized) policy gradient library.
 *
 * C interface to the training, evaluation, comparison, oracle, and
 * gradient-check entry points. All handles are opaque; every function
 * returns a status code and leaves a human-readable message in
 * softpg_last_error() on failure. Strings returned through out-parameters
 * are heap-allocated and must be released with softpg_string_free().
 */
#ifndef SOFTPG_H
#define SOFTPG_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum softpg_status {
  SOFTPG_OK = 0,
  SOFTPG_ERR_ARG = 1,     /* bad argument, unknown key, invalid config */
  SOFTPG_ERR_IO = 2,      /* missing or unreadable file, write failure */
  SOFTPG_ERR_NUMERIC = 3, /* numeric failure or failed check */
  SOFTPG_ERR_INTERNAL = 4
} softpg_status;

typedef struct softpg_config softpg_config;

const char* softpg_version(void);

/* Thread-local message describing the most recent failure; never NULL. */
const char* softpg_last_error(void);

softpg_config* softpg_config_new(void);
void softpg_config_free(softpg_config* cfg);

/* Flat key=value file, '#' comments; unknown keys are hard errors. */
softpg_status softpg_config_load(softpg_config* cfg, const char* path);
softpg_status softpg_config_set(softpg_config* cfg, const char* key,
                                const char* value);
softpg_status softpg_config_validate(const softpg_config* cfg);

/*
 * Full training run. Writes metrics.csv (incrementally) and policy.bin
 * under out_dir. Honors the SOFTPG_THREADS environment variable for
 * rollout workers. Output pointers may be NULL.
 */
softpg_status softpg_train(const softpg_config* cfg, const char* out_dir,
                           double* final_eval_mean, double* final_eval_stddev);

/* Deterministic-action evaluation of a serialized policy. */
softpg_status softpg_evaluate(const char* policy_path, const char* env_name,
                              int episodes, uint64_t seed, double* mean,
                              double* stddev);

/*
 * Paired runs of two configs over seeds 0..n_seeds-1. Per-run outputs land
 * under out_dir; the JSON report is written to out_dir/report.json and,
 * when report_json is non-NULL, returned as a string.
 */
softpg_status softpg_compare(const softpg_config* cfg_a,
                             const softpg_config* cfg_b, int n_seeds,
                             const char* out_dir, char** report_json);

/*
 * Exact soft values, exact gradient routes, and the Monte-Carlo
 * scheme-equivalence report for a text-spec MDP under uniform logits.
 */
softpg_status softpg_oracle(const char* mdp_path, double alpha,
                            long n_samples, uint64_t seed,
                            char** report_text);

/*
 * Finite-difference checks of every loss gradient at `points` random
 * parameter points each. SOFTPG_OK iff all checks passed; the report text
 * is produced either way.
 */
softpg_status softpg_gradcheck(int points, uint64_t seed, char** report_text);

void softpg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SOFTPG_H */
