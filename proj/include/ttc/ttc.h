/* SPDX-License-Identifier: Apache-2.0
 *
 * C API for the test-time compute toolkit. Opaque handles plus status
 * codes; every entry point is safe to call from multiple threads except
 * where noted. Status values double as CLI exit codes:
 *   0 ok, 2 config error, 3 backend error, 4 analysis error.
 */
#ifndef TTC_H
#define TTC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ttc_status {
  TTC_OK = 0,
  TTC_ERROR = 1,          /* generic / invalid argument */
  TTC_ERROR_CONFIG = 2,   /* config invalid or unparsable */
  TTC_ERROR_BACKEND = 3,  /* backend unreachable or misbehaving */
  TTC_ERROR_ANALYSIS = 4, /* unknown or infeasible analysis */
  TTC_ERROR_IO = 5        /* filesystem failure */
} ttc_status;

const char* ttc_version(void);
const char* ttc_status_name(ttc_status status);

/* Message for the most recent failing call on this thread. */
const char* ttc_last_error(void);

/* ------------------------------------------------------------------ */
/* Campaigns                                                           */

typedef struct ttc_run_options {
  const char* endpoint;  /* remote backend base URL; NULL = config / env */
  double tail_fraction;  /* probe-mode tail override; <= 0 = config default */
} ttc_run_options;

void ttc_run_options_init(ttc_run_options* options);

/* Runs a campaign config end to end, writing records.jsonl, ledger.json,
 * manifest.json (and trajectory/probe artifacts for adaptation modes) under
 * out_dir. options may be NULL; the TTC_BACKEND_URL environment variable
 * overrides config endpoints when set. */
ttc_status ttc_campaign_run(const char* config_path, const char* out_dir,
                            const ttc_run_options* options);

/* ------------------------------------------------------------------ */
/* Record sets (opaque handle)                                         */

typedef struct ttc_records ttc_records;

ttc_status ttc_records_open(const char* path, ttc_records** out);
void ttc_records_free(ttc_records* records);
size_t ttc_records_count(const ttc_records* records);
/* Fraction of records that are correct with speedup strictly above 1. */
ttc_status ttc_records_fast1_rate(const ttc_records* records, double* out);

/* Selection report over a record set. strategies is a comma-separated list
 * of strategy names (NULL or "" = all five). Writes the report CSV to
 * out_csv when non-NULL. */
ttc_status ttc_select_report(const ttc_records* records, const char* strategies,
                             int64_t rng_seed, const char* out_csv);

/* ------------------------------------------------------------------ */
/* Analyses                                                            */

typedef struct ttc_analyze_options {
  double target;         /* equivalent_k target; < 0 = unset */
  const char* ci_method; /* "auto" | "seed_range" | "bootstrap" */
  int64_t select_seed;
} ttc_analyze_options;

void ttc_analyze_options_init(ttc_analyze_options* options);

/* kind: scaling | equivalent_k | selection | trajectory | regime |
 *       quartile | probe | ledger. Writes CSV exports under out_dir. */
ttc_status ttc_analyze(const char* input_path, const char* kind, const char* out_dir,
                       const ttc_analyze_options* options);

/* Renders a human-readable campaign summary into buf (NUL-terminated,
 * truncated to cap); needed receives the full length when non-NULL. */
ttc_status ttc_report_render(const char* manifest_path, char* buf, size_t cap,
                             size_t* needed);

/* ------------------------------------------------------------------ */
/* Scalar statistics (for bindings and spot checks)                    */

/* 1 - C(n-c, k) / C(n, k): chance that k uniform draws without replacement
 * contain at least one of the c marked samples. */
ttc_status ttc_success_at_k(int n, int c, int k, double* out);

ttc_status ttc_spearman(const double* x, const double* y, size_t n, double* rho,
                        double* p_two_sided);

double ttc_cohens_h(double p1, double p2);

/* One-sided exact sign test: P(X >= wins), X ~ Binomial(discordant, 1/2). */
ttc_status ttc_exact_sign_test(int wins, int discordant, double* p_one_sided);

/* Paired Wilcoxon signed-rank test; set log_ratio non-zero to test
 * log(a/b). Outputs may be NULL when not needed. */
ttc_status ttc_wilcoxon(const double* a, const double* b, size_t n, int log_ratio,
                        double* statistic, double* p_one_sided, double* p_two_sided);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TTC_H */
