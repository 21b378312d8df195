#ifndef MIXVB_H
#define MIXVB_H

/* C ABI for the mixvb inference library. Data crosses the boundary as opaque
 * handles, status codes, and JSON text; every returned string is heap-owned
 * and must be released with mixvb_string_free. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mixvb_status {
    MIXVB_OK = 0,
    MIXVB_ERR_INPUT = 2,   /* malformed files, JSON, shapes, parameter ranges */
    MIXVB_ERR_NUMERIC = 3, /* numerical invariant violated while running */
    MIXVB_ERR_INTERNAL = 4 /* anything else */
} mixvb_status;

typedef struct mixvb_dataset mixvb_dataset;
typedef struct mixvb_result mixvb_result;

/* Message for the last failing call on this thread; empty string if none. The
 * pointer stays valid until the next failing call on the same thread. */
const char* mixvb_last_error(void);

void mixvb_string_free(char* s);

/* ---- datasets ---- */

mixvb_status mixvb_dataset_read_csv(const char* path, mixvb_dataset** out);
mixvb_status mixvb_dataset_write_csv(const mixvb_dataset* data, const char* path);

/* Draws n observations from the mixture described by model_json. */
mixvb_status mixvb_dataset_simulate(const char* model_json, int64_t n, uint64_t seed,
                                    mixvb_dataset** out);

/* Renders the dataset in its CSV file format. */
mixvb_status mixvb_dataset_csv(const mixvb_dataset* data, char** out);

int64_t mixvb_dataset_size(const mixvb_dataset* data);
void mixvb_dataset_free(mixvb_dataset* data);

/* ---- jobs ----
 * Each job takes a JSON document describing the work and yields a result
 * handle that renders to JSON (always) and CSV (where the job defines one). */

/* job: {"family": .., "prior": .., "config": ..} -> fit-result document */
mixvb_status mixvb_fit(const mixvb_dataset* data, const char* job_json, mixvb_result** out);

/* job: {"family", "k_max", "weight_prior_concentration", "component_prior",
 *       "model_weights", "config"} -> selection document */
mixvb_status mixvb_select(const mixvb_dataset* data, const char* job_json, mixvb_result** out);

/* job: {"objectives": [[k, elbo], ..], "model_weights": ..} -> selection
 * arithmetic on precomputed objectives */
mixvb_status mixvb_select_from_scores(const char* job_json, mixvb_result** out);

/* job: {"rate": "dirichlet|multinomial|gauss_known|gauss_nig|gauss_factorized|
 *       misspecified", "n", "k", family-specific fields, "alpha"?, "sweep"?}
 * -> rate report (CSV sweep over n when "sweep" lists values) */
mixvb_status mixvb_rates(const char* job_json, mixvb_result** out);

/* job: bench protocol document -> report JSON + per-run CSV */
mixvb_status mixvb_bench(const char* protocol_json, mixvb_result** out);

/* job: divergence protocol document -> rows JSON + CSV */
mixvb_status mixvb_divergence(const char* protocol_json, mixvb_result** out);

/* ---- results ---- */

/* Renders the result document; pretty != 0 indents it. */
mixvb_status mixvb_result_json(const mixvb_result* result, int pretty, char** out);

/* CSV rendering; empty string when the job defines none. */
mixvb_status mixvb_result_csv(const mixvb_result* result, char** out);

void mixvb_result_free(mixvb_result* result);

#ifdef __cplusplus
}
#endif

#endif /* MIXVB_H */
