#pragma once

#include "fedae/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fedae {

// counts[true][predicted].
struct ConfusionMatrix {
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t k() const { return counts.size(); }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  double accuracy() const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// For k = 2 the aggregate precision/recall/f1 are those of class 1; for
// k > 2 they are macro means. Zero denominators yield 0.
struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred, std::size_t k);

MetricSet metrics(const ConfusionMatrix& cm);

// Sample-weighted mean of client accuracies.
double server_accuracy(std::span<const std::size_t> test_sizes, std::span<const double> accuracies);

}  // namespace fedae
