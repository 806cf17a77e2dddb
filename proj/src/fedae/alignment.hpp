#pragma once

#include "fedae/matrix.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace fedae {

struct AlignmentOutcome {
  Labels labels;
  double accuracy = 0.0;
  // mapping[cluster] = class; present whenever a remap was computed.
  std::optional<std::vector<int>> mapping;
  bool corrected = false;
};

double label_accuracy(const Labels& y_true, const Labels& y_pred);

// Keeps y_pred or its inversion 1 - y_pred, whichever scores strictly higher;
// ties keep the original.
AlignmentOutcome align_binary(const Labels& y_true, const Labels& y_pred);

// Frequency-based alignment for k contiguous, class-ordered blocks of
// block_size rows each:
//   1. each block claims its most frequent cluster if still unclaimed;
//   2. unresolved blocks walk their own cluster histogram (count descending,
//      index ascending) and claim the first unclaimed cluster;
//   3. anything still unresolved takes the smallest unclaimed cluster.
// The resulting bijection is applied in one pass and kept only if it scores
// strictly higher than the input.
AlignmentOutcome align_multiclass(const Labels& y_true, const Labels& y_pred, std::size_t k,
                                  std::size_t block_size);

// Bijection cluster -> class computed by steps 1-3 above, without applying it.
std::vector<int> block_frequency_mapping(const Labels& y_pred, std::size_t k, std::size_t block_size);

}  // namespace fedae
