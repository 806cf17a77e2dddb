#include "fedae/error.hpp"
#include "fedae/neuralnet.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace fedae;

namespace {

AutoencoderSpec default_spec(std::size_t input_dim) {
  AutoencoderSpec s;
  s.input_dim = input_dim;
  return s;
}

AutoencoderModel zero_model(const AutoencoderSpec& spec) {
  auto m = build_autoencoder(spec, 1);
  auto layers = m.export_layers();
  for (auto& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  m.import_layers(layers);
  return m;
}

}  // namespace

TEST_SUITE("neuralnet") {

TEST_CASE("parameter counts follow the mirrored chain") {
  CHECK(build_autoencoder(default_spec(45), 42).param_count() == 52765);
  CHECK(build_autoencoder(default_spec(48), 42).param_count() == 53398);
  CHECK(build_autoencoder(default_spec(78), 42).param_count() == 59728);

  for (std::size_t d : {1u, 2u, 10u, 45u, 46u, 100u, 777u}) {
    CAPTURE(d);
    const auto m = build_autoencoder(default_spec(d), 3);
    CHECK(m.param_count() == 211 * d + 43270);
    CHECK(m.param_count() == oracle::param_count(d, {105, 90, 75, 60}, 10));
    CHECK(m.layer_count() == 10);
  }

  AutoencoderSpec tiny;
  tiny.input_dim = 1;
  tiny.encoder_hidden = {1};
  tiny.bottleneck_dim = 1;
  const auto m = build_autoencoder(tiny, 0);
  CHECK(m.layer_count() == 4);
  CHECK(m.param_count() == 8);
}

TEST_CASE("initialization is seeded Glorot-uniform with zero biases") {
  const auto a = build_autoencoder(default_spec(45), 7);
  const auto b = build_autoencoder(default_spec(45), 7);
  const auto c = build_autoencoder(default_spec(45), 8);
  CHECK(bitwise_equal(a, b));
  CHECK_FALSE(bitwise_equal(a, c));
  for (const auto& l : a.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.fan_in() + l.fan_out()));
    CHECK(l.weight.cwiseAbs().maxCoeff() <= limit);
    CHECK(l.bias.isZero(0.0));
  }
}

TEST_CASE("invalid dimensions name the offending field") {
  AutoencoderSpec s = default_spec(0);
  CHECK_THROWS_WITH_AS(build_autoencoder(s, 0), doctest::Contains("input_dim"), InvalidArgument);
  s = default_spec(4);
  s.bottleneck_dim = 0;
  CHECK_THROWS_WITH_AS(build_autoencoder(s, 0), doctest::Contains("bottleneck_dim"), InvalidArgument);
  s = default_spec(4);
  s.encoder_hidden = {};
  CHECK_THROWS_WITH_AS(build_autoencoder(s, 0), doctest::Contains("encoder_hidden"), InvalidArgument);
  s.encoder_hidden = {3, 0};
  CHECK_THROWS_WITH_AS(build_autoencoder(s, 0), doctest::Contains("encoder_hidden[1]"), InvalidArgument);
}

TEST_CASE("forward") {
  std::mt19937_64 rng(5);
  const Matrix batch = oracle::random_matrix(7, 45, rng);

  SUBCASE("zero parameters reconstruct zeros") {
    const auto m = zero_model(default_spec(45));
    CHECK(forward(m, batch).isZero(0.0));
    CHECK(encode(m, batch).isZero(0.0));
  }
  SUBCASE("unit one-feature chain passes non-negative input through") {
    AutoencoderSpec s;
    s.input_dim = 1;
    s.encoder_hidden = {1, 1};
    s.bottleneck_dim = 1;
    auto m = build_autoencoder(s, 0);
    auto layers = m.export_layers();
    for (auto& l : layers) {
      l.weight.setOnes();
      l.bias.setZero();
    }
    m.import_layers(layers);
    Matrix x(4, 1);
    x << 0.0, 0.25, 3.0, 17.5;
    CHECK(bitwise_equal(forward(m, x), x));
  }
  SUBCASE("deterministic and shape preserving") {
    const auto m = build_autoencoder(default_spec(45), 11);
    const Matrix a = forward(m, batch);
    const Matrix b = forward(m, batch);
    CHECK(a.rows() == 7);
    CHECK(a.cols() == 45);
    CHECK(bitwise_equal(a, b));
  }
  SUBCASE("width mismatch is a shape error quoting both widths") {
    const auto m = build_autoencoder(default_spec(46), 11);
    CHECK_THROWS_WITH_AS(forward(m, batch), doctest::Contains("expected 46 columns, got 45"), ShapeError);
    CHECK_THROWS_AS(encode(m, batch), ShapeError);
  }
}

TEST_CASE("encode returns the bottleneck activation of the forward pass") {
  std::mt19937_64 rng(9);
  const auto m = build_autoencoder(default_spec(45), 4);
  const Matrix batch = oracle::random_matrix(100, 45, rng, 0.0, 1.0);
  const Matrix z = encode(m, batch);
  CHECK(z.rows() == 100);
  CHECK(z.cols() == 10);
  const auto trace = forward_trace(m, batch);
  CHECK(bitwise_equal(z, trace[m.bottleneck_index()]));
  CHECK(m.bottleneck_index() == 4);
  // Hidden activation is ReLU: re-applying it is a no-op.
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    CHECK(bitwise_equal(trace[i].cwiseMax(0.0), trace[i]));
  }
}

TEST_CASE("mse_loss") {
  Matrix x(1, 2);
  Matrix y(1, 2);
  x << 1, 2;
  y << 3, 4;
  CHECK(mse_loss(x, y) == 4.0);
  CHECK(mse_loss(x, x) == 0.0);
  Matrix a(1, 4);
  a << 0, 0, 0, 6;
  CHECK(mse_loss(a, Matrix::Zero(1, 4)) == 9.0);
  CHECK_THROWS_AS(mse_loss(x, a), ShapeError);

  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix p = oracle::random_matrix(5, 3, rng, -100, 100);
    const Matrix q = oracle::random_matrix(5, 3, rng, -100, 100);
    CHECK(mse_loss(p, p) == 0.0);
    CHECK(mse_loss(p, q) > 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  for (int trial = 0; trial < 20; ++trial) {
    AutoencoderSpec s;
    do {
      s.input_dim = dim(rng);
      s.encoder_hidden = {dim(rng) + 1, dim(rng)};
      s.bottleneck_dim = dim(rng);
    } while (oracle::param_count(s.input_dim, s.encoder_hidden, s.bottleneck_dim) > 200);
    auto m = build_autoencoder(s, static_cast<std::uint64_t>(trial));
    // Non-zero biases so ReLU kinks are not all at the origin.
    auto layers = m.export_layers();
    for (auto& l : layers) l.bias = oracle::random_matrix(l.bias.size(), 1, rng, -0.1, 0.1);
    m.import_layers(layers);
    const Matrix x = oracle::random_matrix(6, static_cast<Eigen::Index>(s.input_dim), rng);

    const auto analytic = loss_gradients(m, x);
    CHECK(analytic.loss == doctest::Approx(oracle::reconstruction_loss(m.layers(), x)).epsilon(1e-12));
    const auto numeric = oracle::finite_difference_gradients(m.layers(), x);
    double worst = 0.0;
    for (std::size_t l = 0; l < numeric.size(); ++l) {
      for (Eigen::Index k = 0; k < numeric[l].weight.size(); ++k) {
        worst = std::max(worst, oracle::relative_error(analytic.layers[l].weight.data()[k], numeric[l].weight.data()[k]));
      }
      for (Eigen::Index k = 0; k < numeric[l].bias.size(); ++k) {
        worst = std::max(worst, oracle::relative_error(analytic.layers[l].bias[k], numeric[l].bias[k]));
      }
    }
    CAPTURE(trial);
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("first Adam step moves a parameter by the learning rate") {
  OptimizerConfig cfg;
  Adam adam(cfg, {1});
  double w = 1.0;
  const double g = 0.5;
  std::span<double> p(&w, 1);
  std::span<const double> gs(&g, 1);
  adam.step(std::span<const std::span<double>>(&p, 1), std::span<const std::span<const double>>(&gs, 1));
  CHECK(std::abs(1.0 - w) == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(std::abs((1.0 - w) - cfg.learning_rate * g / (std::sqrt(g * g) + cfg.epsilon)) < 1e-15);
  CHECK(w < 1.0);
  CHECK(adam.steps_taken() == 1);
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig c;
  c.validate();
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.learning_rate = -1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("training") {
  AutoencoderSpec s;
  s.input_dim = 6;
  s.encoder_hidden = {8, 5};
  s.bottleneck_dim = 3;

  SUBCASE("constant rows: loss decreases over the run") {
    Matrix data(64, 6);
    data.rowwise() = (RowVector(6) << 0.1, 0.9, 0.5, 0.3, 0.7, 0.2).finished();
    auto m = build_autoencoder(s, 1);
    const auto report = train(m, data, 50, {}, 3);
    REQUIRE(report.epochs_run == 50);
    REQUIRE(report.epoch_losses.size() == 50);
    CHECK(report.samples_seen == 50 * 64);
    CHECK(report.epoch_losses.back() < report.epoch_losses.front());
    for (double l : report.epoch_losses) CHECK(l >= 0.0);
  }
  SUBCASE("same seed gives bit-identical parameters") {
    std::mt19937_64 rng(8);
    const Matrix data = oracle::random_matrix(101, 6, rng, 0, 1);
    auto a = build_autoencoder(s, 5);
    auto b = build_autoencoder(s, 5);
    train(a, data, 3, {}, 77);
    train(b, data, 3, {}, 77);
    CHECK(bitwise_equal(a, b));
    auto c = build_autoencoder(s, 5);
    train(c, data, 3, {}, 78);
    CHECK_FALSE(bitwise_equal(a, c));
  }
  SUBCASE("trailing partial batch is trained") {
    Matrix data = Matrix::Constant(33, 6, 0.5);
    auto m = build_autoencoder(s, 2);
    OptimizerConfig opt;
    opt.batch_size = 32;
    const auto r = train(m, data, 1, opt, 0);
    CHECK(r.samples_seen == 33);
  }
  SUBCASE("non-finite data aborts with epoch and batch") {
    Matrix data = Matrix::Constant(40, 6, 0.5);
    data(35, 2) = std::numeric_limits<double>::quiet_NaN();
    auto m = build_autoencoder(s, 2);
    OptimizerConfig opt;
    opt.batch_size = 40;
    CHECK_THROWS_WITH_AS(train(m, data, 2, opt, 0), doctest::Contains("epoch 0, batch 0"), NumericError);
  }
  SUBCASE("argument errors") {
    auto m = build_autoencoder(s, 2);
    CHECK_THROWS_AS(train(m, Matrix::Zero(4, 6), 0, {}, 0), InvalidArgument);
    CHECK_THROWS_AS(train(m, Matrix::Zero(4, 5), 1, {}, 0), ShapeError);
  }
}

TEST_CASE("export and import layers") {
  auto m = build_autoencoder(default_spec(45), 3);
  const auto saved = m.export_layers();
  std::mt19937_64 rng(1);
  train(m, oracle::random_matrix(40, 45, rng, 0, 1), 1, {}, 1);
  CHECK_FALSE(bitwise_equal(saved[0], m.layer(0)));  // export was a deep copy

  auto zeroed = saved;
  for (auto& l : zeroed) {
    l.weight.setZero();
    l.bias.setZero();
  }
  m.import_layers(zeroed);
  CHECK(m.layer(5).weight.isZero(0.0));
  m.import_layers(saved);
  for (std::size_t i = 0; i < saved.size(); ++i) CHECK(bitwise_equal(saved[i], m.layer(i)));

  auto bad = saved;
  bad[3].weight = Matrix::Zero(bad[3].weight.rows(), bad[3].weight.cols() + 1);
  CHECK_THROWS_WITH_AS(m.import_layers(bad), doctest::Contains("layer 3"), ShapeError);
  bad = saved;
  bad.pop_back();
  CHECK_THROWS_AS(m.import_layers(bad), ShapeError);
  // A failed import leaves the model untouched.
  CHECK(bitwise_equal(saved[3], m.layer(3)));
}

TEST_CASE("models of different input width differ only in first and last layer") {
  const auto a = build_autoencoder(default_spec(45), 1).export_layers();
  const auto b = build_autoencoder(default_spec(78), 1).export_layers();
  REQUIRE(a.size() == b.size());
  const std::vector<std::pair<std::size_t, std::size_t>> interior{{105, 90}, {90, 75}, {75, 60}, {60, 10},
                                                                  {10, 60},  {60, 75}, {75, 90}, {90, 105}};
  for (std::size_t i = 1; i + 1 < a.size(); ++i) {
    CHECK(a[i].fan_in() == interior[i - 1].first);
    CHECK(a[i].fan_out() == interior[i - 1].second);
    CHECK(a[i].fan_in() == b[i].fan_in());
    CHECK(a[i].fan_out() == b[i].fan_out());
  }
  CHECK(a.front().fan_in() == 45);
  CHECK(b.front().fan_in() == 78);
  CHECK(a.back().fan_out() == 45);
  CHECK(b.back().fan_out() == 78);
}

}  // TEST_SUITE
