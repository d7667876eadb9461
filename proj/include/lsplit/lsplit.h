/* C interface to the lsplit intrinsic decomposition library.
 *
 * Objects are opaque handles released with their *_destroy function.
 * Every fallible call returns an lsplit_status; on failure the message is
 * available from lsplit_last_error() on the same thread until the next call.
 *
 * Text results are copied into caller buffers: pass cap = 0 to query the
 * required size (including the terminating NUL) through *needed.
 */
#ifndef LSPLIT_LSPLIT_H
#define LSPLIT_LSPLIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(LSPLIT_BUILDING_LIBRARY)
#define LSPLIT_API __attribute__((visibility("default")))
#else
#define LSPLIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsplit_status {
  LSPLIT_OK = 0,
  LSPLIT_ERR_INVALID_ARGUMENT = 1,
  LSPLIT_ERR_IO = 2,
  LSPLIT_ERR_DIMENSION_MISMATCH = 3,
  LSPLIT_ERR_EMPTY_INPUT = 4,
  LSPLIT_ERR_FORMAT = 5,
  LSPLIT_ERR_SHAPE_MISMATCH = 6,
  LSPLIT_ERR_SOLVER = 7,
  LSPLIT_ERR_INTERNAL = 8
} lsplit_status;

typedef struct lsplit_config lsplit_config;
typedef struct lsplit_sequence lsplit_sequence;
typedef struct lsplit_decomposition lsplit_decomposition;
typedef struct lsplit_report lsplit_report;
typedef struct lsplit_pr_curve lsplit_pr_curve;

LSPLIT_API const char* lsplit_version(void);
LSPLIT_API const char* lsplit_status_name(lsplit_status status);
/* Message of the last failed call on this thread, "" if none. */
LSPLIT_API const char* lsplit_last_error(void);
/* Subject (path, key or pixel) of the last failure, "" if none. */
LSPLIT_API const char* lsplit_last_error_subject(void);

LSPLIT_API lsplit_status lsplit_set_threads(int threads);

/* ---- configuration ---------------------------------------------------- */

LSPLIT_API lsplit_status lsplit_config_create(lsplit_config** out);
LSPLIT_API lsplit_status lsplit_config_load(const char* path, lsplit_config** out);
LSPLIT_API lsplit_status lsplit_config_parse(const char* text, lsplit_config** out);
LSPLIT_API void lsplit_config_destroy(lsplit_config* cfg);
LSPLIT_API lsplit_status lsplit_config_set(lsplit_config* cfg, const char* key, const char* value);
LSPLIT_API lsplit_status lsplit_config_get(const lsplit_config* cfg, const char* key, char* buf,
                                           size_t cap, size_t* needed);
LSPLIT_API lsplit_status lsplit_config_validate(const lsplit_config* cfg);
/* Fully resolved config, one "key = value" line per key in sorted order. */
LSPLIT_API lsplit_status lsplit_config_canonical(const lsplit_config* cfg, char* buf, size_t cap,
                                                 size_t* needed);
LSPLIT_API lsplit_status lsplit_config_write(const lsplit_config* cfg, const char* path);

/* ---- sequences -------------------------------------------------------- */

/* mask_dir may be NULL (all pixels valid). */
LSPLIT_API lsplit_status lsplit_sequence_load(const char* frame_dir, const char* mask_dir,
                                              lsplit_sequence** out);
/* rgb holds frames*height*width*3 values in [0,1], interleaved row-major,
 * frames concatenated. masks holds frames*height*width values of 0 or 1, or
 * is NULL. */
LSPLIT_API lsplit_status lsplit_sequence_from_buffers(int frames, int width, int height,
                                                      const double* rgb, const double* masks,
                                                      lsplit_sequence** out);
LSPLIT_API void lsplit_sequence_destroy(lsplit_sequence* seq);
LSPLIT_API lsplit_status lsplit_sequence_dims(const lsplit_sequence* seq, int* frames, int* width,
                                              int* height);

/* ---- decomposition ---------------------------------------------------- */

LSPLIT_API lsplit_status lsplit_decompose(const lsplit_sequence* seq, const lsplit_config* cfg,
                                          lsplit_decomposition** out, lsplit_report** report);

/* Builds a decomposition from log-domain buffers: log_r frames*h*w*3,
 * log_s frames*h*w, illum frames*3. */
LSPLIT_API lsplit_status lsplit_decomposition_from_buffers(int frames, int width, int height,
                                                           const double* log_r,
                                                           const double* log_s,
                                                           const double* illum,
                                                           lsplit_decomposition** out);
LSPLIT_API void lsplit_decomposition_destroy(lsplit_decomposition* d);
LSPLIT_API lsplit_status lsplit_decomposition_dims(const lsplit_decomposition* d, int* frames,
                                                   int* width, int* height);
/* Copies out the log-domain variables; count must match the sizes above. */
LSPLIT_API lsplit_status lsplit_decomposition_log_r(const lsplit_decomposition* d, double* out,
                                                    size_t count);
LSPLIT_API lsplit_status lsplit_decomposition_log_s(const lsplit_decomposition* d, double* out,
                                                    size_t count);
LSPLIT_API lsplit_status lsplit_decomposition_illum(const lsplit_decomposition* d, double* out,
                                                    size_t count);
/* Raw log-domain floats, display PNGs and illum.txt. */
LSPLIT_API lsplit_status lsplit_decomposition_write(const lsplit_decomposition* d,
                                                    const char* dir);
LSPLIT_API lsplit_status lsplit_decomposition_read(const char* dir, lsplit_decomposition** out);

/* ---- solve report ----------------------------------------------------- */

typedef struct lsplit_report_summary {
  int iterations;
  int converged;
  int aborted;
  double final_energy;
  double final_grad_norm;
  double grad_tol;
  int bisto_iterations;
  double bisto_residual;
} lsplit_report_summary;

LSPLIT_API void lsplit_report_destroy(lsplit_report* r);
LSPLIT_API lsplit_status lsplit_report_summary_get(const lsplit_report* r,
                                                   lsplit_report_summary* out);
LSPLIT_API size_t lsplit_report_trace_length(const lsplit_report* r);
LSPLIT_API lsplit_status lsplit_report_trace(const lsplit_report* r, size_t index, int* iteration,
                                             double* energy);
LSPLIT_API lsplit_status lsplit_report_text(const lsplit_report* r, char* buf, size_t cap,
                                            size_t* needed);
LSPLIT_API lsplit_status lsplit_report_write(const lsplit_report* r, const char* path);

/* ---- energy ----------------------------------------------------------- */

typedef struct lsplit_energy_terms {
  double reconstruct;
  double consistency;
  double rsmooth;
  double ssmooth;
  double total; /* reconstruct + w_rc*consistency + w_rsm*rsmooth + w_ssm*ssmooth */
} lsplit_energy_terms;

LSPLIT_API lsplit_status lsplit_losses(const lsplit_sequence* seq, const lsplit_decomposition* d,
                                       const lsplit_config* cfg, lsplit_energy_terms* out);

/* ---- benchmark -------------------------------------------------------- */

typedef struct lsplit_bench_row {
  int frames;
  double brute_ms;
  double closed_ms;
  double brute_value;
  double closed_value;
  double rel_diff;
} lsplit_bench_row;

/* rows must hold `count` entries. */
LSPLIT_API lsplit_status lsplit_bench(const int* frame_counts, size_t count, int size,
                                      uint64_t seed, lsplit_bench_row* rows);

/* ---- evaluation ------------------------------------------------------- */

typedef struct lsplit_whdr_result {
  double whdr;
  double weight_total;
  size_t evaluated;
  size_t skipped;
} lsplit_whdr_result;

/* mask_png may be NULL. */
LSPLIT_API lsplit_status lsplit_eval_whdr(const char* reflectance_png, const char* judgments_json,
                                          const char* mask_png, const lsplit_config* cfg,
                                          lsplit_whdr_result* out);

/* Pooled AP over `count` (shading, label map) pairs. */
LSPLIT_API lsplit_status lsplit_eval_saw(const char* const* shading_pngs,
                                         const char* const* label_pngs, size_t count,
                                         const lsplit_config* cfg, lsplit_pr_curve** out);
LSPLIT_API void lsplit_pr_curve_destroy(lsplit_pr_curve* c);
LSPLIT_API double lsplit_pr_curve_ap(const lsplit_pr_curve* c);
LSPLIT_API size_t lsplit_pr_curve_length(const lsplit_pr_curve* c);
LSPLIT_API lsplit_status lsplit_pr_curve_point(const lsplit_pr_curve* c, size_t index,
                                               double* recall, double* precision);

typedef struct lsplit_mit_result {
  double reflectance_mse;
  double reflectance_lmse;
  double reflectance_dssim;
  double shading_mse;
  double shading_lmse;
  double shading_dssim;
} lsplit_mit_result;

/* mask_png may be NULL (all valid). */
LSPLIT_API lsplit_status lsplit_eval_mit(const char* pred_reflectance, const char* pred_shading,
                                         const char* gt_reflectance, const char* gt_shading,
                                         const char* mask_png, const lsplit_config* cfg,
                                         lsplit_mit_result* out);

#ifdef __cplusplus
}
#endif

#endif
