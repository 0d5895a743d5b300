/* C interface to the compressive phase retrieval library.
 *
 * Conventions:
 *  - Every function that can fail returns cpr_status; CPR_OK is 0.
 *  - On failure, cpr_last_error() returns a message for the calling thread,
 *    valid until that thread's next library call.
 *  - Out-parameters are written only on CPR_OK.
 *  - Objects are opaque; destroy functions accept NULL and never fail.
 *  - Indices at this boundary are 0-based; file formats are 1-based.
 */

#ifndef CPR_CPR_H_
#define CPR_CPR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CPR_API __declspec(dllexport)
#else
#define CPR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpr_status {
  CPR_OK = 0,
  CPR_ERROR_INVALID_ARGUMENT = 1, /* malformed input or option */
  CPR_ERROR_MODEL = 2,            /* data inconsistent with the signal model */
  CPR_ERROR_IO = 3,               /* file could not be read or written */
  CPR_ERROR_TARGET_NOT_REACHED = 4, /* phase transition search exhausted */
  CPR_ERROR_INTERNAL = 5,
} cpr_status;

typedef enum cpr_sensing_mode {
  CPR_SENSING_FOURIER = 0,
  CPR_SENSING_GAUSSIAN = 1,
  CPR_SENSING_BERNOULLI = 2,
} cpr_sensing_mode;

typedef enum cpr_anchor_mode {
  CPR_ANCHOR_UNIFORM = 0,   /* support drawn uniformly */
  CPR_ANCHOR_IN_SUPPORT = 1, /* index 0 forced into the support */
  CPR_ANCHOR_FIXED_UNIT = 2, /* index 0 in support with unit magnitude */
} cpr_anchor_mode;

typedef enum cpr_render_format {
  CPR_FORMAT_CSV = 0,
  CPR_FORMAT_JSON = 1,
  CPR_FORMAT_GNUPLOT = 2,
} cpr_render_format;

typedef struct cpr_signal cpr_signal;
typedef struct cpr_measurements cpr_measurements;
typedef struct cpr_recovery cpr_recovery;
typedef struct cpr_table cpr_table;

/* ---- library ---------------------------------------------------------- */

CPR_API const char* cpr_version(void);
CPR_API const char* cpr_last_error(void);

/* Frees strings returned through char** out-parameters. */
CPR_API void cpr_string_destroy(char* s);

/* ---- signals ---------------------------------------------------------- */

CPR_API cpr_status cpr_signal_create(size_t n, cpr_signal** out);
CPR_API cpr_status cpr_signal_random_sparse(size_t n, size_t k, uint64_t seed,
                                            cpr_anchor_mode anchor, cpr_signal** out);
CPR_API size_t cpr_signal_length(const cpr_signal* s);
CPR_API cpr_status cpr_signal_set(cpr_signal* s, size_t index, double re, double im);
CPR_API cpr_status cpr_signal_get(const cpr_signal* s, size_t index, double* re, double* im);
CPR_API cpr_status cpr_signal_save(const cpr_signal* s, const char* path);
CPR_API cpr_status cpr_signal_load(const char* path, cpr_signal** out);
CPR_API void cpr_signal_destroy(cpr_signal* s);

/* ---- measurement ------------------------------------------------------ */

/* Masked Fourier intensities of x at `blocks` sampled rows (drawn without
 * replacement from seed; requires 1 <= blocks <= n - 1).  snr_db sets the
 * per-instance noise level; pass +infinity or NaN for noiseless data. */
CPR_API cpr_status cpr_measure_fourier(const cpr_signal* x, size_t blocks, double snr_db,
                                       uint64_t seed, cpr_measurements** out);

/* Dense random sketch intensities (noiseless); mode must be gaussian or
 * bernoulli. */
CPR_API cpr_status cpr_measure_dense(const cpr_signal* x, size_t blocks,
                                     cpr_sensing_mode mode, uint64_t seed,
                                     cpr_measurements** out);

CPR_API size_t cpr_measurements_dimension(const cpr_measurements* m);
CPR_API size_t cpr_measurements_blocks(const cpr_measurements* m);
CPR_API cpr_sensing_mode cpr_measurements_mode(const cpr_measurements* m);
CPR_API double cpr_measurements_noise_variance(const cpr_measurements* m);
CPR_API cpr_status cpr_measurements_value(const cpr_measurements* m, size_t mask,
                                          size_t block, double* value);

/* binary_format != 0 writes the compact binary form, 0 the text form;
 * loading sniffs the format. */
CPR_API cpr_status cpr_measurements_save(const cpr_measurements* m, const char* path,
                                         int binary_format);
CPR_API cpr_status cpr_measurements_load(const char* path, cpr_measurements** out);
CPR_API void cpr_measurements_destroy(cpr_measurements* m);

/* ---- recovery --------------------------------------------------------- */

/* Runs both stages.  options_json may be NULL for defaults, or a JSON
 * object with any of:
 *   epsilon_mode ("zero" | "estimated" | "fixed"), fixed_epsilon,
 *   epsilon_confidence, append_anchor_row (bool), success_threshold,
 *   solver_max_ops, solver_gap_tol, solver_feasibility_tol,
 *   solver_method ("auto" | "dr" | "fista").
 * Unknown keys are rejected. */
CPR_API cpr_status cpr_recover(const cpr_measurements* m, const char* options_json,
                               cpr_recovery** out);

CPR_API cpr_status cpr_recovery_signal(const cpr_recovery* r, cpr_signal** out);
CPR_API double cpr_recovery_stage1_residual(const cpr_recovery* r);
CPR_API double cpr_recovery_epsilon(const cpr_recovery* r);
CPR_API double cpr_recovery_objective(const cpr_recovery* r);
CPR_API double cpr_recovery_solver_residual(const cpr_recovery* r);
CPR_API size_t cpr_recovery_iterations(const cpr_recovery* r);
CPR_API int cpr_recovery_converged(const cpr_recovery* r);

/* Relative mean squared error after the best global-phase alignment of the
 * estimate onto `truth`. */
CPR_API cpr_status cpr_recovery_align(const cpr_recovery* r, const cpr_signal* truth,
                                      double* mse);
CPR_API void cpr_recovery_destroy(cpr_recovery* r);

/* ---- experiments ------------------------------------------------------ */

/* config_json keys mirror the simulator configuration (see README).  The
 * trials table is produced only when the config sets record_trials and
 * trials_out is non-NULL; pass NULL to skip it. */
CPR_API cpr_status cpr_run_success_rate(const char* config_json, cpr_table** aggregate_out,
                                        cpr_table** trials_out);
CPR_API cpr_status cpr_run_noise_sweep(const char* config_json, cpr_table** aggregate_out,
                                       cpr_table** trials_out);

/* all_reached_out (optional) is set to 0 when some target rate is not
 * attainable within the configured measurement range; the run itself still
 * returns CPR_OK with the partial table. */
CPR_API cpr_status cpr_run_phase_transition(const char* config_json,
                                            cpr_table** aggregate_out,
                                            cpr_table** trials_out, int* all_reached_out);

/* Canonical JSON echo of a parsed configuration, for storing next to
 * result tables.  Free with cpr_string_destroy. */
CPR_API cpr_status cpr_experiment_manifest(const char* config_json, const char* experiment,
                                           char** out);

/* ---- tables ----------------------------------------------------------- */

CPR_API size_t cpr_table_rows(const cpr_table* t);
CPR_API size_t cpr_table_cols(const cpr_table* t);
CPR_API const char* cpr_table_column(const cpr_table* t, size_t col);
CPR_API const char* cpr_table_cell(const cpr_table* t, size_t row, size_t col);
CPR_API cpr_status cpr_table_render(const cpr_table* t, cpr_render_format format, char** out);
CPR_API void cpr_table_destroy(cpr_table* t);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CPR_CPR_H_ */
