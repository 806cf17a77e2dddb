#include "fedae/neuralnet.hpp"

#include "fedae/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace fedae {

namespace {

void check_width(const Matrix& batch, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(batch.cols()) != expected) {
    std::ostringstream msg;
    msg << what << ": expected " << expected << " columns, got " << batch.cols();
    throw ShapeError(msg.str());
  }
}

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::relu) m = m.cwiseMax(0.0);
}

}  // namespace

void AutoencoderSpec::validate() const {
  if (input_dim == 0) throw InvalidArgument("input_dim must be positive");
  if (encoder_hidden.empty()) throw InvalidArgument("encoder_hidden must not be empty");
  for (std::size_t i = 0; i < encoder_hidden.size(); ++i) {
    if (encoder_hidden[i] == 0) {
      throw InvalidArgument("encoder_hidden[" + std::to_string(i) + "] must be positive");
    }
  }
  if (bottleneck_dim == 0) throw InvalidArgument("bottleneck_dim must be positive");
}

std::vector<std::size_t> AutoencoderSpec::layer_widths() const {
  std::vector<std::size_t> widths;
  widths.reserve(layer_count() + 1);
  widths.push_back(input_dim);
  widths.insert(widths.end(), encoder_hidden.begin(), encoder_hidden.end());
  widths.push_back(bottleneck_dim);
  widths.insert(widths.end(), encoder_hidden.rbegin(), encoder_hidden.rend());
  widths.push_back(input_dim);
  return widths;
}

bool bitwise_equal(const LayerWeights& a, const LayerWeights& b) {
  return bitwise_equal(a.weight, b.weight) && bitwise_equal(Matrix(a.bias), Matrix(b.bias));
}

AutoencoderModel::AutoencoderModel(AutoencoderSpec spec, std::vector<LayerWeights> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
  spec_.validate();
  const auto widths = spec_.layer_widths();
  if (layers_.size() != spec_.layer_count()) {
    throw ShapeError("expected " + std::to_string(spec_.layer_count()) + " layers, got " +
                     std::to_string(layers_.size()));
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.fan_in() != widths[i] || l.fan_out() != widths[i + 1] ||
        static_cast<std::size_t>(l.bias.size()) != widths[i + 1]) {
      std::ostringstream msg;
      msg << "layer " << i << ": expected " << widths[i] << "x" << widths[i + 1] << ", got "
          << l.fan_in() << "x" << l.fan_out() << " with bias " << l.bias.size();
      throw ShapeError(msg.str());
    }
  }
}

std::size_t AutoencoderModel::param_count() const {
  return std::accumulate(layers_.begin(), layers_.end(), std::size_t{0},
                         [](std::size_t acc, const LayerWeights& l) { return acc + l.param_count(); });
}

void AutoencoderModel::import_layers(const std::vector<LayerWeights>& layers) {
  if (layers.size() != layers_.size()) {
    throw ShapeError("import: expected " + std::to_string(layers_.size()) + " layers, got " +
                     std::to_string(layers.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& src = layers[i];
    const auto& dst = layers_[i];
    if (src.fan_in() != dst.fan_in() || src.fan_out() != dst.fan_out() ||
        src.bias.size() != dst.bias.size()) {
      std::ostringstream msg;
      msg << "import: layer " << i << " shape " << src.fan_in() << "x" << src.fan_out()
          << " does not match " << dst.fan_in() << "x" << dst.fan_out();
      throw ShapeError(msg.str());
    }
  }
  layers_ = layers;
}

bool AutoencoderModel::activation_is_relu(std::size_t layer_index) const {
  const auto act =
      layer_index + 1 == layers_.size() ? spec_.output_activation : spec_.hidden_activation;
  return act == Activation::relu;
}

bool bitwise_equal(const AutoencoderModel& a, const AutoencoderModel& b) {
  if (a.layer_count() != b.layer_count()) return false;
  for (std::size_t i = 0; i < a.layer_count(); ++i) {
    if (!bitwise_equal(a.layer(i), b.layer(i))) return false;
  }
  return true;
}

AutoencoderModel build_autoencoder(const AutoencoderSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto widths = spec.layer_widths();
  std::mt19937_64 rng(seed);
  std::vector<LayerWeights> layers;
  layers.reserve(spec.layer_count());
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(widths[i]);
    const auto fan_out = static_cast<Eigen::Index>(widths[i + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    LayerWeights l{Matrix(fan_in, fan_out), Vector::Zero(fan_out)};
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) l.weight.data()[k] = dist(rng);
    layers.push_back(std::move(l));
  }
  return AutoencoderModel(spec, std::move(layers));
}

std::vector<Matrix> forward_trace(const AutoencoderModel& model, const Matrix& batch) {
  check_width(batch, model.input_dim(), "forward");
  std::vector<Matrix> trace;
  trace.reserve(model.layer_count());
  const Matrix* input = &batch;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const auto& l = model.layer(i);
    Matrix z = (*input) * l.weight;
    z.rowwise() += l.bias.transpose();
    apply_activation(z, model.activation_is_relu(i) ? Activation::relu : Activation::identity);
    trace.push_back(std::move(z));
    input = &trace.back();
  }
  return trace;
}

Matrix forward(const AutoencoderModel& model, const Matrix& batch) {
  return std::move(forward_trace(model, batch).back());
}

Matrix encode(const AutoencoderModel& model, const Matrix& batch) {
  check_width(batch, model.input_dim(), "encode");
  Matrix a = batch;
  for (std::size_t i = 0; i <= model.bottleneck_index(); ++i) {
    const auto& l = model.layer(i);
    Matrix z = a * l.weight;
    z.rowwise() += l.bias.transpose();
    apply_activation(z, model.activation_is_relu(i) ? Activation::relu : Activation::identity);
    a = std::move(z);
  }
  return a;
}

double mse_loss(const Matrix& x, const Matrix& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    std::ostringstream msg;
    msg << "mse_loss: shape " << x.rows() << "x" << x.cols() << " vs " << x_hat.rows() << "x"
        << x_hat.cols();
    throw ShapeError(msg.str());
  }
  if (x.size() == 0) return 0.0;
  return (x - x_hat).squaredNorm() / static_cast<double>(x.size());
}

Gradients loss_gradients(const AutoencoderModel& model, const Matrix& batch) {
  const auto trace = forward_trace(model, batch);
  const Matrix& out = trace.back();
  Gradients g;
  g.loss = mse_loss(batch, out);
  g.layers.resize(model.layer_count());

  // d loss / d output for the mean over all elements.
  Matrix delta = (out - batch) * (2.0 / static_cast<double>(batch.size()));
  for (std::size_t i = model.layer_count(); i-- > 0;) {
    if (model.activation_is_relu(i)) {
      delta = delta.cwiseProduct((trace[i].array() > 0.0).cast<double>().matrix());
    }
    const Matrix& input = i == 0 ? batch : trace[i - 1];
    g.layers[i].weight = input.transpose() * delta;
    g.layers[i].bias = delta.colwise().sum().transpose();
    if (i > 0) delta = delta * model.layer(i).weight.transpose();
  }
  return g;
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw InvalidArgument("beta1 must lie in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw InvalidArgument("beta2 must lie in (0,1)");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
}

Adam::Adam(const OptimizerConfig& config, std::vector<std::size_t> block_sizes)
    : config_(config) {
  config_.validate();
  for (std::size_t n : block_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void Adam::step(std::span<const std::span<double>> params,
                std::span<const std::span<const double>> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("adam: block count mismatch");
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t b = 0; b < m_.size(); ++b) {
    auto& m = m_[b];
    auto& v = v_[b];
    if (params[b].size() != m.size() || grads[b].size() != m.size()) {
      throw ShapeError("adam: block " + std::to_string(b) + " size mismatch");
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double g = grads[b][k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      params[b][k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

TrainingReport train(AutoencoderModel& model, const Matrix& data, std::size_t epochs,
                     const OptimizerConfig& opt, std::uint64_t seed) {
  opt.validate();
  check_width(data, model.input_dim(), "train");
  if (epochs == 0) throw InvalidArgument("epochs must be at least 1");
  const auto rows = static_cast<std::size_t>(data.rows());
  if (rows == 0) throw InvalidArgument("train: empty data");

  std::vector<std::size_t> blocks;
  for (const auto& l : model.layers()) {
    blocks.push_back(static_cast<std::size_t>(l.weight.size()));
    blocks.push_back(static_cast<std::size_t>(l.bias.size()));
  }
  Adam adam(opt, blocks);
  std::vector<std::span<double>> param_spans(blocks.size());
  std::vector<std::span<const double>> grad_spans(blocks.size());

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainingReport report;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < rows; start += opt.batch_size, ++batch_index) {
      const std::size_t end = std::min(rows, start + opt.batch_size);
      const Matrix batch =
          gather_rows(data, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                     order.begin() + static_cast<std::ptrdiff_t>(end)));
      auto grads = loss_gradients(model, batch);
      if (!std::isfinite(grads.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      for (std::size_t i = 0; i < model.layer_count(); ++i) {
        auto& l = model.layer(i);
        param_spans[2 * i] = {l.weight.data(), static_cast<std::size_t>(l.weight.size())};
        param_spans[2 * i + 1] = {l.bias.data(), static_cast<std::size_t>(l.bias.size())};
        const auto& g = grads.layers[i];
        grad_spans[2 * i] = {g.weight.data(), static_cast<std::size_t>(g.weight.size())};
        grad_spans[2 * i + 1] = {g.bias.data(), static_cast<std::size_t>(g.bias.size())};
      }
      adam.step(param_spans, grad_spans);
      weighted_loss += grads.loss * static_cast<double>(end - start);
      report.samples_seen += end - start;
    }
    report.epoch_losses.push_back(weighted_loss / static_cast<double>(rows));
    ++report.epochs_run;
  }
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    if (!model.layer(i).all_finite()) {
      throw NumericError("non-finite parameters in layer " + std::to_string(i) + " after training");
    }
  }
  return report;
}

}  // namespace fedae
