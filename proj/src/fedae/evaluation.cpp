#include "fedae/evaluation.hpp"

#include "fedae/error.hpp"

#include <numeric>

namespace fedae {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

double ConfusionMatrix::accuracy() const {
  return ratio(static_cast<double>(trace()), static_cast<double>(total()));
}

ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred, std::size_t k) {
  if (y_true.size() != y_pred.size()) throw ShapeError("confusion: label vectors differ in length");
  if (k == 0) throw InvalidArgument("confusion: k must be positive");
  ConfusionMatrix cm{std::vector<std::vector<std::uint64_t>>(k, std::vector<std::uint64_t>(k, 0))};
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    const int a = y_true[t];
    const int b = y_pred[t];
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= k || static_cast<std::size_t>(b) >= k) {
      throw InvalidArgument("confusion: label out of range at position " + std::to_string(t));
    }
    ++cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
  return cm;
}

MetricSet metrics(const ConfusionMatrix& cm) {
  const std::size_t k = cm.k();
  if (k == 0) throw InvalidArgument("metrics: empty confusion matrix");
  MetricSet m;
  m.accuracy = cm.accuracy();
  m.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    double predicted = 0.0;
    double actual = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      predicted += static_cast<double>(cm.counts[j][c]);
      actual += static_cast<double>(cm.counts[c][j]);
    }
    const auto tp = static_cast<double>(cm.counts[c][c]);
    auto& pc = m.per_class[c];
    pc.precision = ratio(tp, predicted);
    pc.recall = ratio(tp, actual);
    pc.f1 = ratio(2.0 * pc.precision * pc.recall, pc.precision + pc.recall);
    m.macro_precision += pc.precision / static_cast<double>(k);
    m.macro_recall += pc.recall / static_cast<double>(k);
    m.macro_f1 += pc.f1 / static_cast<double>(k);
  }
  if (k == 2) {
    m.precision = m.per_class[1].precision;
    m.recall = m.per_class[1].recall;
    m.f1 = m.per_class[1].f1;
  } else {
    m.precision = m.macro_precision;
    m.recall = m.macro_recall;
    m.f1 = m.macro_f1;
  }
  return m;
}

double server_accuracy(std::span<const std::size_t> test_sizes, std::span<const double> accuracies) {
  if (test_sizes.empty()) throw InvalidArgument("server_accuracy: no clients");
  if (test_sizes.size() != accuracies.size()) throw ShapeError("server_accuracy: length mismatch");
  double total = 0.0;
  for (std::size_t n : test_sizes) {
    if (n == 0) throw InvalidArgument("server_accuracy: test sizes must be positive");
    total += static_cast<double>(n);
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < test_sizes.size(); ++c) {
    acc += static_cast<double>(test_sizes[c]) / total * accuracies[c];
  }
  return acc;
}

}  // namespace fedae
