#include "fedae/fedae.h"

#include "fedae/dataprep.hpp"
#include "fedae/error.hpp"
#include "fedae/neuralnet.hpp"
#include "fedae/persistence.hpp"
#include "fedae/runner.hpp"

#include <cmath>
#include <new>
#include <optional>
#include <string>

struct fedae_model {
  fedae::AutoencoderModel model;
};

struct fedae_run_result {
  fedae::ExperimentResult result;
};

namespace {

thread_local std::string last_error;

fedae_status fail(fedae_status status, const char* what) {
  last_error = what;
  return status;
}

// Runs `body`, translating core exceptions into status codes.
template <typename Body>
fedae_status guarded(Body&& body) noexcept {
  try {
    body();
    return FEDAE_OK;
  } catch (const fedae::ConfigError& e) {
    return fail(FEDAE_ERR_CONFIG, e.what());
  } catch (const fedae::FormatError& e) {
    return fail(FEDAE_ERR_FORMAT, e.what());
  } catch (const fedae::ShapeError& e) {
    return fail(FEDAE_ERR_SHAPE, e.what());
  } catch (const fedae::IoError& e) {
    return fail(FEDAE_ERR_IO, e.what());
  } catch (const fedae::DataError& e) {
    return fail(FEDAE_ERR_DATA, e.what());
  } catch (const fedae::NumericError& e) {
    return fail(FEDAE_ERR_NUMERIC, e.what());
  } catch (const fedae::InvalidArgument& e) {
    return fail(FEDAE_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FEDAE_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(FEDAE_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(FEDAE_ERR_RUNTIME, "unknown error");
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw fedae::InvalidArgument(what);
}

fedae::Matrix copy_in(const double* data, size_t rows, size_t cols) {
  require(data != nullptr || rows * cols == 0, "null data pointer");
  return Eigen::Map<const fedae::Matrix>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void copy_out(const fedae::Matrix& m, double* out, size_t out_len) {
  require(out != nullptr, "null output pointer");
  if (out_len < static_cast<size_t>(m.size())) {
    throw fedae::ShapeError("output buffer holds " + std::to_string(out_len) + " values, need " +
                            std::to_string(m.size()));
  }
  std::copy(m.data(), m.data() + m.size(), out);
}

fedae::OptimizerConfig to_core(const fedae_optimizer_config* c) {
  fedae::OptimizerConfig opt;
  if (c != nullptr) {
    opt.learning_rate = c->learning_rate;
    opt.beta1 = c->beta1;
    opt.beta2 = c->beta2;
    opt.epsilon = c->epsilon;
    opt.batch_size = c->batch_size;
  }
  return opt;
}

}  // namespace

extern "C" {

const char* fedae_version(void) { return "0.1.0"; }

const char* fedae_status_string(fedae_status status) {
  switch (status) {
    case FEDAE_OK: return "ok";
    case FEDAE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FEDAE_ERR_SHAPE: return "shape mismatch";
    case FEDAE_ERR_IO: return "i/o error";
    case FEDAE_ERR_FORMAT: return "bad model file";
    case FEDAE_ERR_CONFIG: return "config error";
    case FEDAE_ERR_DATA: return "data error";
    case FEDAE_ERR_NUMERIC: return "numeric error";
    case FEDAE_ERR_RUNTIME: return "runtime error";
  }
  return "unknown status";
}

const char* fedae_last_error(void) { return last_error.c_str(); }

void fedae_optimizer_config_init(fedae_optimizer_config* config) {
  if (config == nullptr) return;
  const fedae::OptimizerConfig d;
  *config = {d.learning_rate, d.beta1, d.beta2, d.epsilon, d.batch_size};
}

fedae_status fedae_model_build(size_t input_dim, const size_t* encoder_hidden, size_t hidden_count,
                               size_t bottleneck_dim, uint64_t seed, fedae_model** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(encoder_hidden != nullptr || hidden_count == 0, "null encoder_hidden");
    fedae::AutoencoderSpec spec;
    spec.input_dim = input_dim;
    spec.encoder_hidden.assign(encoder_hidden, encoder_hidden + hidden_count);
    spec.bottleneck_dim = bottleneck_dim;
    *out = new fedae_model{fedae::build_autoencoder(spec, seed)};
  });
}

fedae_status fedae_model_load(const char* path, fedae_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new fedae_model{fedae::load_model(path)};
  });
}

fedae_status fedae_model_save(const fedae_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    fedae::save_model(model->model, path);
  });
}

void fedae_model_free(fedae_model* model) { delete model; }

size_t fedae_model_input_dim(const fedae_model* model) { return model ? model->model.input_dim() : 0; }

size_t fedae_model_bottleneck_dim(const fedae_model* model) {
  return model ? model->model.spec().bottleneck_dim : 0;
}

size_t fedae_model_layer_count(const fedae_model* model) { return model ? model->model.layer_count() : 0; }

size_t fedae_model_param_count(const fedae_model* model) { return model ? model->model.param_count() : 0; }

fedae_status fedae_model_layer_shape(const fedae_model* model, size_t index, size_t* fan_in, size_t* fan_out) {
  return guarded([&] {
    require(model != nullptr && fan_in != nullptr && fan_out != nullptr, "null argument");
    if (index >= model->model.layer_count()) {
      throw fedae::InvalidArgument("layer index " + std::to_string(index) + " out of range");
    }
    *fan_in = model->model.layer(index).fan_in();
    *fan_out = model->model.layer(index).fan_out();
  });
}

fedae_status fedae_model_forward(const fedae_model* model, const double* batch, size_t rows, size_t cols,
                                 double* out, size_t out_len) {
  return guarded([&] {
    require(model != nullptr, "null model");
    copy_out(fedae::forward(model->model, copy_in(batch, rows, cols)), out, out_len);
  });
}

fedae_status fedae_model_encode(const fedae_model* model, const double* batch, size_t rows, size_t cols,
                                double* out, size_t out_len) {
  return guarded([&] {
    require(model != nullptr, "null model");
    copy_out(fedae::encode(model->model, copy_in(batch, rows, cols)), out, out_len);
  });
}

fedae_status fedae_model_train(fedae_model* model, const double* data, size_t rows, size_t cols, size_t epochs,
                               const fedae_optimizer_config* config, uint64_t seed, double* final_loss) {
  return guarded([&] {
    require(model != nullptr, "null model");
    const auto report = fedae::train(model->model, copy_in(data, rows, cols), epochs, to_core(config), seed);
    if (final_loss != nullptr) *final_loss = report.epoch_losses.back();
  });
}

void fedae_synth_spec_init(fedae_synth_spec* spec) {
  if (spec == nullptr) return;
  const fedae::SynthSpec d;
  *spec = {d.k, d.per_class_count, d.feature_count, d.class_mean_separation, d.noise_std, d.seed};
}

fedae_status fedae_synth_write_csv(const fedae_synth_spec* spec, const char* path) {
  return guarded([&] {
    require(spec != nullptr && path != nullptr, "null argument");
    fedae::SynthSpec s{spec->k, spec->features, spec->per_class, spec->separation, spec->noise, spec->seed};
    fedae::write_csv(fedae::synth_generate(s), path);
  });
}

void fedae_run_options_init(fedae_run_options* options) {
  if (options == nullptr) return;
  *options = fedae_run_options{nullptr, nullptr, 0, 0, 0, nullptr, 0, 0, 0};
}

fedae_status fedae_run(const fedae_run_options* options, fedae_run_result** result) {
  return guarded([&] {
    require(options != nullptr, "null options");
    require(options->config_path != nullptr && options->out_dir != nullptr, "config_path and out_dir are required");
    fedae::RunOptions run;
    run.config_path = options->config_path;
    run.out_dir = options->out_dir;
    if (options->rounds > 0) run.rounds = options->rounds;
    if (options->has_seed) run.seed = options->seed;
    if (options->label_col != nullptr) run.label_col = std::string(options->label_col);
    run.dump_cm = options->dump_cm != 0;
    run.dump_centroids = options->dump_centroids != 0;
    run.threads = options->threads;
    auto r = fedae::run_to_directory(run);
    if (result != nullptr) *result = new fedae_run_result{std::move(r)};
  });
}

void fedae_run_result_free(fedae_run_result* result) { delete result; }

size_t fedae_run_result_round_count(const fedae_run_result* result) {
  return result ? result->result.rounds.size() : 0;
}

size_t fedae_run_result_client_count(const fedae_run_result* result) {
  return result ? result->result.clients.size() : 0;
}

const char* fedae_run_result_client_name(const fedae_run_result* result, size_t client) {
  if (result == nullptr || client >= result->result.clients.size()) return nullptr;
  return result->result.clients[client].name.c_str();
}

size_t fedae_run_result_best_round(const fedae_run_result* result, size_t client) {
  if (result == nullptr || client >= result->result.best_rounds.size()) return 0;
  return result->result.best_rounds[client];
}

double fedae_run_result_accuracy(const fedae_run_result* result, size_t round, size_t client) {
  if (result == nullptr || round >= result->result.rounds.size() ||
      client >= result->result.rounds[round].clients.size()) {
    return std::nan("");
  }
  return result->result.rounds[round].clients[client].accuracy;
}

double fedae_run_result_f1(const fedae_run_result* result, size_t round, size_t client) {
  if (result == nullptr || round >= result->result.rounds.size() ||
      client >= result->result.rounds[round].clients.size()) {
    return std::nan("");
  }
  return result->result.rounds[round].clients[client].f1;
}

double fedae_run_result_server_accuracy(const fedae_run_result* result, size_t round) {
  if (result == nullptr || round >= result->result.rounds.size()) return std::nan("");
  return result->result.rounds[round].server_accuracy;
}

}  // extern "C"
