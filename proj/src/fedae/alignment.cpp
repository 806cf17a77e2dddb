#include "fedae/alignment.hpp"

#include "fedae/error.hpp"

#include <algorithm>
#include <numeric>

namespace fedae {

namespace {

void check_lengths(const Labels& y_true, const Labels& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("label vectors differ in length: " + std::to_string(y_true.size()) + " vs " +
                     std::to_string(y_pred.size()));
  }
}

void check_range(const Labels& y, std::size_t k, const char* what) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= k) {
      throw InvalidArgument(std::string(what) + "[" + std::to_string(i) + "] = " + std::to_string(y[i]) +
                            " outside 0.." + std::to_string(k - 1));
    }
  }
}

}  // namespace

double label_accuracy(const Labels& y_true, const Labels& y_pred) {
  check_lengths(y_true, y_pred);
  if (y_true.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i];
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

AlignmentOutcome align_binary(const Labels& y_true, const Labels& y_pred) {
  check_lengths(y_true, y_pred);
  check_range(y_true, 2, "y_true");
  check_range(y_pred, 2, "y_pred");

  Labels inverted(y_pred.size());
  std::transform(y_pred.begin(), y_pred.end(), inverted.begin(), [](int y) { return 1 - y; });
  const double accuracy = label_accuracy(y_true, y_pred);
  const double inverted_accuracy = label_accuracy(y_true, inverted);

  AlignmentOutcome out;
  if (inverted_accuracy > accuracy) {
    out.labels = std::move(inverted);
    out.accuracy = inverted_accuracy;
    out.mapping = std::vector<int>{1, 0};
    out.corrected = true;
  } else {
    out.labels = y_pred;
    out.accuracy = accuracy;
  }
  return out;
}

std::vector<int> block_frequency_mapping(const Labels& y_pred, std::size_t k, std::size_t block_size) {
  // dominant[i] = cluster claimed by class block i, -1 while unresolved.
  std::vector<int> dominant(k, -1);
  std::vector<bool> claimed(k, false);
  std::vector<std::vector<std::size_t>> histograms(k, std::vector<std::size_t>(k, 0));

  for (std::size_t i = 0; i < k; ++i) {
    auto& hist = histograms[i];
    for (std::size_t t = i * block_size; t < (i + 1) * block_size; ++t) ++hist[static_cast<std::size_t>(y_pred[t])];
    const auto top = static_cast<std::size_t>(std::max_element(hist.begin(), hist.end()) - hist.begin());
    if (!claimed[top]) {
      dominant[i] = static_cast<int>(top);
      claimed[top] = true;
    }
  }

  for (std::size_t i = 0; i < k; ++i) {
    if (dominant[i] != -1) continue;
    const auto& hist = histograms[i];
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return hist[a] > hist[b]; });
    for (std::size_t c : order) {
      if (hist[c] == 0) break;  // only clusters observed in the block
      if (!claimed[c]) {
        dominant[i] = static_cast<int>(c);
        claimed[c] = true;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < k; ++i) {
    if (dominant[i] != -1) continue;
    for (std::size_t c = 0; c < k; ++c) {
      if (!claimed[c]) {
        dominant[i] = static_cast<int>(c);
        claimed[c] = true;
        break;
      }
    }
  }

  std::vector<int> mapping(k);
  for (std::size_t i = 0; i < k; ++i) mapping[static_cast<std::size_t>(dominant[i])] = static_cast<int>(i);
  return mapping;
}

AlignmentOutcome align_multiclass(const Labels& y_true, const Labels& y_pred, std::size_t k,
                                  std::size_t block_size) {
  check_lengths(y_true, y_pred);
  if (k == 0 || block_size == 0) throw InvalidArgument("align_multiclass: k and block_size must be positive");
  if (y_pred.size() != k * block_size) {
    throw InvalidArgument("align_multiclass: " + std::to_string(y_pred.size()) + " labels do not form " +
                          std::to_string(k) + " blocks of " + std::to_string(block_size));
  }
  check_range(y_true, k, "y_true");
  check_range(y_pred, k, "y_pred");

  const double accuracy = label_accuracy(y_true, y_pred);
  auto mapping = block_frequency_mapping(y_pred, k, block_size);
  Labels remapped(y_pred.size());
  std::transform(y_pred.begin(), y_pred.end(), remapped.begin(),
                 [&](int c) { return mapping[static_cast<std::size_t>(c)]; });
  const double corrected_accuracy = label_accuracy(y_true, remapped);

  AlignmentOutcome out;
  out.mapping = std::move(mapping);
  if (corrected_accuracy > accuracy) {
    out.labels = std::move(remapped);
    out.accuracy = corrected_accuracy;
    out.corrected = true;
  } else {
    out.labels = y_pred;
    out.accuracy = accuracy;
  }
  return out;
}

}  // namespace fedae
