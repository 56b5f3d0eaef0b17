/* rwre: exit probabilities, ballisticity diagnostics and multiscale
 * verification for random walks in i.i.d. uniformly elliptic random
 * environments.
 *
 * C API of the shared library. All functions return a status code; on failure
 * rwre_last_error() yields a JSON description {code, module, message, context}
 * for the calling thread. Strings handed out as char** are owned by the caller
 * and released with rwre_string_free().
 */
#ifndef RWRE_H
#define RWRE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef RWRE_API
#define RWRE_API __attribute__((visibility("default")))
#endif

typedef enum rwre_status {
  RWRE_OK = 0,
  RWRE_ERR_CONFIG = 2, /* invalid configuration / arguments */
  RWRE_ERR_RUNTIME = 3 /* anything else */
} rwre_status;

/* Opaque seeded environment: a deterministic transition-probability field. */
typedef struct rwre_env rwre_env;

RWRE_API const char* rwre_version(void);

/* JSON description of the last error on this thread, or NULL if none. The
 * returned pointer stays valid until the next failing call on the thread. */
RWRE_API const char* rwre_last_error(void);

RWRE_API void rwre_string_free(char* s);

/* law_json: {"d":int, "kappa":real, "kind":string, "params":object,
 * "seed":uint64}; kinds: deterministic_drift, epsilon_perturbed_srw,
 * simplex_uniform_floor, two_point. */
RWRE_API rwre_status rwre_env_create(const char* law_json, rwre_env** out);
RWRE_API void rwre_env_destroy(rwre_env* env);
RWRE_API rwre_status rwre_env_dimension(const rwre_env* env, int32_t* out_d);

/* out must hold 2d entries, ordered (e1, -e1, ..., ed, -ed). */
RWRE_API rwre_status rwre_env_site_probs(const rwre_env* env, const int64_t* coords, double* out);

/* Exact absorption probabilities of the rotated box (half length L along the
 * direction, half width L_tilde lateral) from an interior start site;
 * out_pos_neg_lat receives the positive/negative/lateral exit masses. */
RWRE_API rwre_status rwre_box_exit_probabilities(const rwre_env* env, const double* direction,
                                                 int32_t d, double L, double L_tilde,
                                                 const int64_t* start, double out_pos_neg_lat[3]);

/* Closed-form birth-death absorption at 0 for the chain on 0..n started at
 * `start`, with right-probabilities p_right[1..n-1]. */
RWRE_API rwre_status rwre_gambler_ruin_left_exit(int32_t n, int32_t start, const double* p_right,
                                                 double* out);

/* Runs one experiment from a JSON config document. kind / out_dir / threads /
 * seed override the config when non-NULL / non-empty / positive (a kind that
 * contradicts the document is a config error). When stream_stdout is nonzero,
 * result rows (CSV, including wall time) stream to stdout as they complete.
 * On success *manifest_json receives the run manifest. */
RWRE_API rwre_status rwre_run_experiment(const char* config_json, const char* kind,
                                         const char* out_dir, int32_t threads,
                                         const uint64_t* seed_override, int32_t stream_stdout,
                                         char** manifest_json);

/* Builds the report bundle for a finished run directory. */
RWRE_API rwre_status rwre_emit_report(const char* run_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* RWRE_H */
