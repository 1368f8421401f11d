/* C API for the sdejump library: jump-diffusion SDE simulation,
 * hypothesis checking and Monte Carlo experiments.
 *
 * All structured input and output is JSON text; strings returned
 * through char** are heap-allocated and must be released with
 * sdej_string_free. On failure the return code is nonzero and
 * sdej_last_error() describes the problem (thread-local).
 */
#ifndef SDEJ_H
#define SDEJ_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdej_status {
  SDEJ_OK = 0,
  SDEJ_ERR_INVALID = 1, /* unknown names, bad parameters, malformed JSON */
  SDEJ_ERR_NUMERIC = 2, /* NaN/Inf met during coefficient evaluation */
  SDEJ_ERR_INTERNAL = 3
} sdej_status;

/* Opaque handle for a model from the built-in registry. */
typedef struct sdej_model sdej_model;

const char* sdej_version(void);

/* Message of the most recent failure on this thread; never NULL. */
const char* sdej_last_error(void);

void sdej_string_free(char* s);

/* JSON array of registry model names. */
sdej_status sdej_registry_names(char** json_out);

/* params_json: object mapping parameter name to number, e.g.
 * {"p": 3.0, "K0": 4.0}; NULL or "" means all defaults. */
sdej_status sdej_model_create(const char* name, const char* params_json, sdej_model** out);
void sdej_model_destroy(sdej_model* model);

/* config_json: {"x0": [..], "horizon": T, "n_steps": n, "seed": s,
 *               "explosion_radius": R}
 * csv_out: path table "t,x_1,..,x_d,jump_flag"; summary_json: run
 * metadata (schema_version, exploded flag, endpoint, ...). Either
 * output pointer may be NULL when not wanted. */
sdej_status sdej_simulate(const sdej_model* model, const char* config_json, char** csv_out,
                          char** summary_json);

/* config_json: {"conditions": ["C9", ...], "radius": R, "n_points": n,
 *               "n_pairs": m, "modulus": {"kind": "linear", "param": 3.0},
 *               "K": .., "lambda": .., "p": ..}
 * report_json: array of {condition_id, max_residual, witness,
 * satisfied, grid_size} objects. */
sdej_status sdej_check(const sdej_model* model, const char* config_json, char** report_json);

/* kind: continuity | nonconfluence | moments | girsanov | irreducibility.
 * config_json fields are kind-specific; common Monte Carlo knobs are
 * n_paths, n_steps, seed, n_threads, explosion_radius. */
sdej_status sdej_experiment(const sdej_model* model, const char* kind, const char* config_json,
                            char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* SDEJ_H */
