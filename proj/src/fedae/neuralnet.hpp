#pragma once

#include "fedae/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedae {

enum class Activation { relu, identity };

// Mirrored dense autoencoder layout. Full widths are
// input -> encoder_hidden... -> bottleneck -> reversed(encoder_hidden)... -> input.
struct AutoencoderSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> encoder_hidden{105, 90, 75, 60};
  std::size_t bottleneck_dim = 10;
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::identity;

  // Throws InvalidArgument naming the first offending field.
  void validate() const;

  // Widths at every layer boundary; size = layer count + 1.
  std::vector<std::size_t> layer_widths() const;

  std::size_t layer_count() const { return 2 * encoder_hidden.size() + 2; }
  std::size_t bottleneck_index() const { return encoder_hidden.size(); }
};

struct LayerWeights {
  Matrix weight;  // fan_in x fan_out
  Vector bias;    // fan_out

  std::size_t fan_in() const { return static_cast<std::size_t>(weight.rows()); }
  std::size_t fan_out() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t param_count() const { return fan_in() * fan_out() + fan_out(); }
  bool all_finite() const { return weight.allFinite() && bias.allFinite(); }
};

bool bitwise_equal(const LayerWeights& a, const LayerWeights& b);

class AutoencoderModel {
 public:
  // Checks that `layers` chain consistently with `spec`.
  AutoencoderModel(AutoencoderSpec spec, std::vector<LayerWeights> layers);

  const AutoencoderSpec& spec() const { return spec_; }
  std::size_t input_dim() const { return spec_.input_dim; }
  std::size_t bottleneck_index() const { return spec_.bottleneck_index(); }
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t param_count() const;

  const std::vector<LayerWeights>& layers() const { return layers_; }
  const LayerWeights& layer(std::size_t i) const { return layers_.at(i); }
  LayerWeights& layer(std::size_t i) { return layers_.at(i); }

  // Deep copy of every layer's parameters.
  std::vector<LayerWeights> export_layers() const { return layers_; }

  // Replaces all parameters. Throws ShapeError naming the first layer index
  // whose shape disagrees; the model is left untouched in that case.
  void import_layers(const std::vector<LayerWeights>& layers);

  bool activation_is_relu(std::size_t layer_index) const;

 private:
  AutoencoderSpec spec_;
  std::vector<LayerWeights> layers_;
};

bool bitwise_equal(const AutoencoderModel& a, const AutoencoderModel& b);

// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
AutoencoderModel build_autoencoder(const AutoencoderSpec& spec, std::uint64_t seed);

Matrix forward(const AutoencoderModel& model, const Matrix& batch);

// Activation output of every layer, in order; the last entry is the
// reconstruction.
std::vector<Matrix> forward_trace(const AutoencoderModel& model, const Matrix& batch);

// Bottleneck activations, rows x bottleneck_dim.
Matrix encode(const AutoencoderModel& model, const Matrix& batch);

// Mean over all elements of (x - x_hat)^2.
double mse_loss(const Matrix& x, const Matrix& x_hat);

struct Gradients {
  double loss = 0.0;
  std::vector<LayerWeights> layers;
};

// Self-reconstruction loss of `batch` and its gradient with respect to every
// parameter.
Gradients loss_gradients(const AutoencoderModel& model, const Matrix& batch);

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;

  void validate() const;
};

// Bias-corrected Adam over a fixed list of parameter blocks.
class Adam {
 public:
  Adam(const OptimizerConfig& config, std::vector<std::size_t> block_sizes);

  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

  std::uint64_t steps_taken() const { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t t_ = 0;
};

struct TrainingReport {
  std::vector<double> epoch_losses;
  std::size_t epochs_run = 0;
  std::size_t samples_seen = 0;
};

// Mini-batch Adam on the self-reconstruction loss. Moments start fresh on
// every call; the trailing partial batch is kept. The reported epoch loss is
// the sample-weighted mean of the pre-update batch losses.
TrainingReport train(AutoencoderModel& model, const Matrix& data, std::size_t epochs,
                     const OptimizerConfig& opt, std::uint64_t seed);

}  // namespace fedae
