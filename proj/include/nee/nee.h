/*
 * C API for the neural execution engine library.
 *
 * Conventions:
 *   - Every function returns a nee_status; NEE_OK means success.
 *   - On failure, nee_last_error() returns a thread-local message describing
 *     what went wrong.
 *   - Structured inputs and outputs cross the boundary as JSON strings.
 *     Strings returned through char** are heap-allocated; release them with
 *     nee_string_free().
 *   - Opaque handles are created and destroyed by matching open/close calls.
 */
#ifndef NEE_NEE_H
#define NEE_NEE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nee_status {
  NEE_OK = 0,
  NEE_ERR_INVALID_ARGUMENT = 1,
  NEE_ERR_IO = 2,
  NEE_ERR_FORMAT = 3,
  NEE_ERR_NUMERIC = 4,
  NEE_ERR_BUDGET = 5,
  NEE_ERR_INTERNAL = 6,
} nee_status;

uint32_t nee_abi_version(void);
const char* nee_status_name(nee_status status);
/* Thread-local message for the most recent failure in this thread. */
const char* nee_last_error(void);
void nee_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

typedef struct nee_dataset nee_dataset;

/* Generates a dataset from a JSON generator spec and writes it to out_path.
 * Unknown spec fields are rejected at use; omitted fields take defaults. */
nee_status nee_dataset_generate(const char* spec_json, const char* out_path);
nee_status nee_dataset_open(const char* path, nee_dataset** out);
void nee_dataset_close(nee_dataset* ds);
/* Spec plus record counts. */
nee_status nee_dataset_info(const nee_dataset* ds, char** out_json);
/* Full human-readable dump (spec + every record). */
nee_status nee_dataset_dump_json(const nee_dataset* ds, char** out_json);

/* ---- training ----------------------------------------------------------- */

/* Full train-config JSON for a task at "desk" or "paper" scale; callers
 * overlay their overrides and pass the result to nee_train. */
nee_status nee_default_train_config(const char* task, const char* scale,
                                    char** out_json);

/* Trains per the JSON train config on the given dataset file, writes the
 * checkpoint, and returns metrics (loss curve tail, validation curve,
 * steps run) as JSON. A "model_variant" key (e.g. "all_mod-C5") replaces the
 * model block with the named architecture variant, keeping explicit extent
 * overrides. */
nee_status nee_train(const char* train_config_json, const char* dataset_path,
                     const char* out_checkpoint_path, char** out_metrics_json);

/* ---- checkpoints -------------------------------------------------------- */

typedef struct nee_checkpoint nee_checkpoint;

nee_status nee_checkpoint_open(const char* path, nee_checkpoint** out);
void nee_checkpoint_close(nee_checkpoint* ckpt);
/* Meta block: model config, train config, dataset spec, step, seed. */
nee_status nee_checkpoint_info(const nee_checkpoint* ckpt, char** out_json);

/* ---- evaluation --------------------------------------------------------- */

/* eval_spec_json fields:
 *   task: selection-sort | seq2seq-baseline | merge-sort | dijkstra | prim |
 *         add | multiply | identities | sharpness
 *   lengths: [sizes...]      (sequence/graph tasks)
 *   n_per_length, seed
 *   aux_checkpoint: path     (dijkstra: the addition model)
 * Arithmetic tasks regenerate the held-out evaluation pairs from the
 * checkpoint's dataset spec. */
nee_status nee_evaluate(const nee_checkpoint* ckpt, const char* eval_spec_json,
                        char** out_report_json);

/* ---- composition -------------------------------------------------------- */

/* algo: dijkstra | prim | merge-sort.
 * input_json: {"graph": {"n": N, "edges": [[u,v,w],...]}, "source": s} or
 *             {"sequence": [v, ...]}.
 * min/aux checkpoints may be NULL when options_json sets "oracle": true. */
nee_status nee_compose(const char* algo, const nee_checkpoint* min_ckpt,
                       const nee_checkpoint* aux_ckpt, const char* input_json,
                       const char* options_json, char** out_json);

/* ---- ablations ---------------------------------------------------------- */

/* variants_json: ["all_mod", "vanilla", ...]; options_json tunes budgets. */
nee_status nee_ablate(const char* variants_json, const char* options_json,
                      char** out_table_json);

/* ---- inspection exports -------------------------------------------------- */

/* values: input numbers (the trailing end token is appended internally). */
nee_status nee_export_attention(const nee_checkpoint* ckpt,
                                const uint32_t* values, size_t n_values,
                                const char* csv_path);

/* holdout_json: [numbers...] or NULL to take the holdout recorded in the
 * checkpoint's dataset spec. Writes the projection file and returns the
 * summary (explained variance, interpolation score) as JSON. */
nee_status nee_export_pca(const nee_checkpoint* ckpt, const char* holdout_json,
                          const char* out_path, char** out_summary_json);

/* ---- reports ------------------------------------------------------------- */

/* Renders an evaluation report (object or array) as markdown. */
nee_status nee_report_markdown(const char* report_json, char** out_markdown);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NEE_NEE_H */
