#ifndef SGLDL_SGLDL_H
#define SGLDL_SGLDL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef SGLDL_BUILDING_LIBRARY
#    define SGLDL_API __declspec(dllexport)
#  else
#    define SGLDL_API __declspec(dllimport)
#  endif
#else
#  define SGLDL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sgldl_status {
  SGLDL_OK = 0,
  SGLDL_ERR_INVALID_ARGUMENT = 1,
  SGLDL_ERR_SHAPE = 2,
  SGLDL_ERR_PARSE = 3,
  SGLDL_ERR_CONFIG = 4,
  SGLDL_ERR_IO = 5,
  SGLDL_ERR_NUMERIC = 6,
  SGLDL_ERR_STATE = 7,
  SGLDL_ERR_DEGENERATE = 8,
  SGLDL_ERR_CELL_FAILED = 9, /* an experiment finished but at least one cell failed */
  SGLDL_ERR_INTERNAL = 10
} sgldl_status;

typedef struct sgldl_experiment sgldl_experiment;
typedef struct sgldl_dataset sgldl_dataset;
typedef struct sgldl_model sgldl_model;

typedef struct sgldl_metrics {
  double dis1; /* Euclidean */
  double dis2; /* KL */
  double sim1; /* intersection */
  double sim2; /* fidelity */
  size_t labels_learned;
  size_t evaluated;
  size_t skipped;
} sgldl_metrics;

SGLDL_API const char* sgldl_version(void);
SGLDL_API const char* sgldl_status_string(sgldl_status status);
/* Message for the last failing call on this thread; empty if none. */
SGLDL_API const char* sgldl_last_error(void);

SGLDL_API sgldl_status sgldl_experiment_load(const char* path, sgldl_experiment** out);
SGLDL_API sgldl_status sgldl_experiment_parse(const char* json_text, sgldl_experiment** out);
SGLDL_API void sgldl_experiment_free(sgldl_experiment* exp);
/* 64 hex chars; valid while `exp` lives. */
SGLDL_API const char* sgldl_experiment_hash(const sgldl_experiment* exp);
SGLDL_API const char* sgldl_experiment_output_dir(const sgldl_experiment* exp);

SGLDL_API sgldl_status sgldl_dataset_generate(const sgldl_experiment* exp, sgldl_dataset** out);
SGLDL_API sgldl_status sgldl_dataset_load(const char* path, sgldl_dataset** out);
SGLDL_API sgldl_status sgldl_dataset_save(const sgldl_dataset* ds, const char* path);
SGLDL_API const char* sgldl_dataset_hash(const sgldl_dataset* ds);
SGLDL_API size_t sgldl_dataset_num_tasks(const sgldl_dataset* ds);
SGLDL_API void sgldl_dataset_free(sgldl_dataset* ds);

/* Runs every (method, seed) cell and writes CSVs and checkpoints under
   out_dir. `ds` may be NULL to generate the stream from the config. Returns
   SGLDL_ERR_CELL_FAILED when any cell failed; its partial rows and a failure
   marker are still written. */
SGLDL_API sgldl_status sgldl_experiment_run(const sgldl_experiment* exp, const sgldl_dataset* ds, const char* out_dir,
                                            size_t workers);

SGLDL_API sgldl_status sgldl_model_load(const char* path, sgldl_model** out);
SGLDL_API void sgldl_model_free(sgldl_model* model);
SGLDL_API int sgldl_model_task_index(const sgldl_model* model);
SGLDL_API size_t sgldl_model_num_labels(const sgldl_model* model);
SGLDL_API size_t sgldl_model_input_dim(const sgldl_model* model);
/* features: n x input_dim row-major; out: n x num_labels row-major. */
SGLDL_API sgldl_status sgldl_model_predict(const sgldl_model* model, const double* features, size_t n, double* out);
SGLDL_API sgldl_status sgldl_model_evaluate(const sgldl_model* model, const sgldl_dataset* ds, size_t task,
                                            sgldl_metrics* out);
/* Writes the correlation matrix as a heatmap CSV or in its text format. */
SGLDL_API sgldl_status sgldl_model_export_scm_csv(const sgldl_model* model, const char* path);
SGLDL_API sgldl_status sgldl_model_export_scm_text(const sgldl_model* model, const char* path);

#ifdef __cplusplus
}
#endif

#endif
