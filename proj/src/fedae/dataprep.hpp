#pragma once

#include "fedae/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace fedae {

struct LabeledDataset {
  Matrix features;
  Labels labels;
  std::vector<std::string> feature_names;
  std::size_t k = 0;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t feature_count() const { return static_cast<std::size_t>(features.cols()); }

  // Throws DataError if any invariant (lengths, label range) is violated.
  void validate() const;
  LabeledDataset subset(const std::vector<std::size_t>& indices) const;
};

// Column name, or zero-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

// Parses a label-column flag: all-digit text is an index, anything else a name.
LabelColumn parse_label_column(const std::string& text);

struct CsvLoad {
  LabeledDataset dataset;
  std::size_t dropped_rows = 0;
  // Raw label text for each dense label id.
  std::vector<std::string> label_names;
};

// Reads a comma-separated file with a header row. Rows with a missing,
// unparseable or non-finite feature cell are dropped and counted. Labels are
// re-encoded to 0..k-1: ascending numeric order when every raw label is an
// integer, first-appearance order otherwise.
CsvLoad load_csv(const std::filesystem::path& path, const LabelColumn& label_column);

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path,
               const std::string& label_header = "label");

class MinMaxScaler {
 public:
  MinMaxScaler(RowVector min, RowVector max);

  static MinMaxScaler fit(const Matrix& train_features);

  // (x - min) / (max - min) per column; constant columns map to 0. Values are
  // not clamped.
  Matrix apply(const Matrix& features) const;

  const RowVector& min() const { return min_; }
  const RowVector& max() const { return max_; }

 private:
  RowVector min_;
  RowVector max_;
};

struct SplitSpec {
  std::size_t test_per_class = 0;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

struct Partition {
  LabeledDataset train;
  LabeledDataset validation;
  // k contiguous blocks of test_per_class rows, in ascending class order.
  LabeledDataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> test_rows;
};

Partition partition(const LabeledDataset& ds, const SplitSpec& split);

struct SynthSpec {
  std::size_t k = 2;
  std::size_t feature_count = 10;
  std::size_t per_class_count = 100;
  double class_mean_separation = 10.0;
  double noise_std = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
};

// Class c is drawn from N(c * separation * 1, noise_std^2 I); rows are grouped
// by class.
LabeledDataset synth_generate(const SynthSpec& spec);

}  // namespace fedae
