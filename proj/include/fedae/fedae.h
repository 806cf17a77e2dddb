/*
 * fedae: federated autoencoder anomaly detection over heterogeneous clients.
 *
 * C interface to the core library. Objects are opaque handles owned by the
 * caller and released with the matching *_free function. Every fallible call
 * returns a fedae_status; on failure fedae_last_error() describes the cause
 * for the calling thread until its next failing call.
 */
#ifndef FEDAE_FEDAE_H
#define FEDAE_FEDAE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FEDAE_BUILDING)
#    define FEDAE_API __declspec(dllexport)
#  else
#    define FEDAE_API __declspec(dllimport)
#  endif
#else
#  define FEDAE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fedae_status {
  FEDAE_OK = 0,
  FEDAE_ERR_INVALID_ARGUMENT = 1,
  FEDAE_ERR_SHAPE = 2,
  FEDAE_ERR_IO = 3,
  FEDAE_ERR_FORMAT = 4, /* bad FEDAE magic, version or truncated file */
  FEDAE_ERR_CONFIG = 5, /* experiment config could not be parsed */
  FEDAE_ERR_DATA = 6,
  FEDAE_ERR_NUMERIC = 7,
  FEDAE_ERR_RUNTIME = 8
} fedae_status;

FEDAE_API const char* fedae_version(void);
FEDAE_API const char* fedae_status_string(fedae_status status);
FEDAE_API const char* fedae_last_error(void);

/* ---- models ------------------------------------------------------------ */

typedef struct fedae_model fedae_model;

typedef struct fedae_optimizer_config {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  size_t batch_size;
} fedae_optimizer_config;

/* Fills the defaults: 1e-3, 0.9, 0.999, 1e-8, 32. */
FEDAE_API void fedae_optimizer_config_init(fedae_optimizer_config* config);

/* Mirrored autoencoder input -> hidden... -> bottleneck -> ...hidden -> input. */
FEDAE_API fedae_status fedae_model_build(size_t input_dim, const size_t* encoder_hidden, size_t hidden_count,
                                         size_t bottleneck_dim, uint64_t seed, fedae_model** out);
FEDAE_API fedae_status fedae_model_load(const char* path, fedae_model** out);
FEDAE_API fedae_status fedae_model_save(const fedae_model* model, const char* path);
FEDAE_API void fedae_model_free(fedae_model* model);

FEDAE_API size_t fedae_model_input_dim(const fedae_model* model);
FEDAE_API size_t fedae_model_bottleneck_dim(const fedae_model* model);
FEDAE_API size_t fedae_model_layer_count(const fedae_model* model);
FEDAE_API size_t fedae_model_param_count(const fedae_model* model);
FEDAE_API fedae_status fedae_model_layer_shape(const fedae_model* model, size_t index, size_t* fan_in,
                                               size_t* fan_out);

/* batch is row-major rows x cols; out must hold rows x input_dim values. */
FEDAE_API fedae_status fedae_model_forward(const fedae_model* model, const double* batch, size_t rows,
                                           size_t cols, double* out, size_t out_len);
/* out must hold rows x bottleneck_dim values. */
FEDAE_API fedae_status fedae_model_encode(const fedae_model* model, const double* batch, size_t rows,
                                          size_t cols, double* out, size_t out_len);
/* final_loss, when non-NULL, receives the last epoch's mean loss. */
FEDAE_API fedae_status fedae_model_train(fedae_model* model, const double* data, size_t rows, size_t cols,
                                         size_t epochs, const fedae_optimizer_config* config, uint64_t seed,
                                         double* final_loss);

/* ---- synthetic data ---------------------------------------------------- */

typedef struct fedae_synth_spec {
  size_t k;
  size_t per_class;
  size_t features;
  double separation;
  double noise;
  uint64_t seed;
} fedae_synth_spec;

FEDAE_API void fedae_synth_spec_init(fedae_synth_spec* spec);

/* Writes a labeled CSV: feature columns f0..f{n-1} followed by "label". */
FEDAE_API fedae_status fedae_synth_write_csv(const fedae_synth_spec* spec, const char* path);

/* ---- experiments ------------------------------------------------------- */

typedef struct fedae_run_options {
  const char* config_path;
  const char* out_dir;
  size_t rounds;         /* 0: keep the config value */
  int has_seed;
  uint64_t seed;
  const char* label_col; /* NULL: keep the config value */
  int dump_cm;
  int dump_centroids;
  size_t threads;        /* 0: hardware concurrency */
} fedae_run_options;

typedef struct fedae_run_result fedae_run_result;

FEDAE_API void fedae_run_options_init(fedae_run_options* options);

/* Runs the experiment and writes rounds.jsonl, summary.json and models/ under
 * out_dir. result may be NULL; otherwise it receives a handle to free with
 * fedae_run_result_free. */
FEDAE_API fedae_status fedae_run(const fedae_run_options* options, fedae_run_result** result);
FEDAE_API void fedae_run_result_free(fedae_run_result* result);

FEDAE_API size_t fedae_run_result_round_count(const fedae_run_result* result);
FEDAE_API size_t fedae_run_result_client_count(const fedae_run_result* result);
FEDAE_API const char* fedae_run_result_client_name(const fedae_run_result* result, size_t client);
FEDAE_API size_t fedae_run_result_best_round(const fedae_run_result* result, size_t client);
FEDAE_API double fedae_run_result_accuracy(const fedae_run_result* result, size_t round, size_t client);
FEDAE_API double fedae_run_result_f1(const fedae_run_result* result, size_t round, size_t client);
FEDAE_API double fedae_run_result_server_accuracy(const fedae_run_result* result, size_t round);

#ifdef __cplusplus
}
#endif

#endif /* FEDAE_FEDAE_H */
