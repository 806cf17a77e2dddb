#include "fedae/dataprep.hpp"

#include "fedae/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>

namespace fedae {

namespace {

// RFC-4180 record splitter: quoted fields may hold commas, doubled quotes and
// line breaks. Accepts LF or CRLF.
class CsvReader {
 public:
  explicit CsvReader(std::string text) : text_(std::move(text)) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    std::string field;
    bool quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        break;
      } else {
        field.push_back(c);
      }
    }
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string text_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_real(const std::string& cell) {
  const std::string s = trim(cell);
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(const std::string& s) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

bool is_blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void LabeledDataset::validate() const {
  if (labels.size() != rows()) {
    throw DataError("label count " + std::to_string(labels.size()) + " differs from row count " +
                    std::to_string(rows()));
  }
  if (feature_names.size() != feature_count()) {
    throw DataError("feature name count differs from feature count");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw DataError("label " + std::to_string(y) + " outside 0.." + std::to_string(k) + "-1");
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  out.features = gather_rows(features, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  out.feature_names = feature_names;
  out.k = k;
  return out;
}

LabelColumn parse_label_column(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return static_cast<std::size_t>(std::stoull(text));
  }
  return text;
}

CsvLoad load_csv(const std::filesystem::path& path, const LabelColumn& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  CsvReader reader(buffer.str());

  std::vector<std::string> header;
  if (!reader.next(header) || is_blank(header)) throw DataError("missing header row in " + path.string());
  for (auto& h : header) h = trim(h);
  // Strip a UTF-8 byte-order mark.
  if (header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  std::size_t label_index = 0;
  if (const auto* name = std::get_if<std::string>(&label_column)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw DataError("label column '" + *name + "' not found in " + path.string());
    label_index = static_cast<std::size_t>(it - header.begin());
  } else {
    label_index = std::get<std::size_t>(label_column);
    if (label_index >= header.size()) {
      throw DataError("label column index " + std::to_string(label_index) + " out of range (" +
                      std::to_string(header.size()) + " columns)");
    }
  }

  const std::size_t feature_count = header.size() - 1;
  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::size_t dropped = 0;
  std::vector<std::string> fields;
  std::vector<double> row(feature_count);
  while (reader.next(fields)) {
    if (is_blank(fields)) continue;
    bool ok = fields.size() == header.size();
    std::string label;
    for (std::size_t c = 0, f = 0; ok && c < fields.size(); ++c) {
      if (c == label_index) {
        label = trim(fields[c]);
        ok = !label.empty();
        continue;
      }
      const auto v = parse_real(fields[c]);
      if (!v) {
        ok = false;
      } else {
        row[f++] = *v;
      }
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    raw_labels.push_back(std::move(label));
  }
  if (raw_labels.empty()) throw DataError("no usable rows in " + path.string());

  // Dense re-encoding of the raw labels.
  std::vector<std::string> distinct;
  std::unordered_map<std::string, int> seen;
  for (const auto& l : raw_labels) {
    if (seen.emplace(l, 0).second) distinct.push_back(l);
  }
  const bool all_integer = std::all_of(distinct.begin(), distinct.end(),
                                       [](const std::string& s) { return parse_integer(s).has_value(); });
  if (all_integer) {
    std::stable_sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
      return *parse_integer(a) < *parse_integer(b);
    });
  }
  for (std::size_t i = 0; i < distinct.size(); ++i) seen[distinct[i]] = static_cast<int>(i);

  CsvLoad out;
  out.dropped_rows = dropped;
  out.label_names = distinct;
  auto& ds = out.dataset;
  ds.k = distinct.size();
  ds.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(raw_labels.size()),
                                         static_cast<Eigen::Index>(feature_count));
  ds.labels.reserve(raw_labels.size());
  for (const auto& l : raw_labels) ds.labels.push_back(seen.at(l));
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_index) ds.feature_names.push_back(header[c]);
  }
  return out;
}

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path,
               const std::string& label_header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& name : ds.feature_names) out << quote_if_needed(name) << ',';
  out << quote_if_needed(label_header) << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.feature_count(); ++c) {
      out << ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) << ',';
    }
    out << ds.labels[r] << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

MinMaxScaler::MinMaxScaler(RowVector min, RowVector max) : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw ShapeError("scaler min/max length mismatch");
  for (Eigen::Index i = 0; i < min_.size(); ++i) {
    if (!(min_[i] <= max_[i])) throw InvalidArgument("scaler min exceeds max at feature " + std::to_string(i));
  }
}

MinMaxScaler MinMaxScaler::fit(const Matrix& train_features) {
  if (train_features.rows() == 0 || train_features.cols() == 0) {
    throw InvalidArgument("cannot fit scaler on an empty matrix");
  }
  return MinMaxScaler(train_features.colwise().minCoeff(), train_features.colwise().maxCoeff());
}

Matrix MinMaxScaler::apply(const Matrix& features) const {
  if (features.cols() != min_.size()) {
    throw ShapeError("scaler fitted on " + std::to_string(min_.size()) + " features, applied to " +
                     std::to_string(features.cols()));
  }
  Matrix out(features.rows(), features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double range = max_[c] - min_[c];
    if (range > 0.0) {
      out.col(c) = (features.col(c).array() - min_[c]) / range;
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

Partition partition(const LabeledDataset& ds, const SplitSpec& split) {
  ds.validate();
  if (split.test_per_class == 0) throw InvalidArgument("test_per_class must be positive");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0,1)");
  }
  std::vector<std::vector<std::size_t>> by_class(ds.k);
  for (std::size_t i = 0; i < ds.rows(); ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  std::mt19937_64 rng(split.seed);
  Partition p;
  std::vector<std::size_t> rest;
  for (std::size_t c = 0; c < ds.k; ++c) {
    auto& rows = by_class[c];
    if (rows.size() < split.test_per_class) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                      " samples, fewer than test_per_class = " + std::to_string(split.test_per_class));
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    p.test_rows.insert(p.test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(split.test_per_class));
    rest.insert(rest.end(), rows.begin() + static_cast<std::ptrdiff_t>(split.test_per_class), rows.end());
  }
  std::sort(rest.begin(), rest.end());
  std::shuffle(rest.begin(), rest.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(split.train_fraction * static_cast<double>(rest.size())));
  p.train_rows.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
  p.validation_rows.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());

  p.train = ds.subset(p.train_rows);
  p.validation = ds.subset(p.validation_rows);
  p.test = ds.subset(p.test_rows);
  return p;
}

void SynthSpec::validate() const {
  if (k < 2) throw InvalidArgument("synth: k must be at least 2");
  if (feature_count == 0) throw InvalidArgument("synth: feature_count must be positive");
  if (per_class_count == 0) throw InvalidArgument("synth: per_class_count must be positive");
  if (!(class_mean_separation > 0.0)) throw InvalidArgument("synth: separation must be positive");
  if (!(noise_std > 0.0)) throw InvalidArgument("synth: noise_std must be positive");
}

LabeledDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_std);
  LabeledDataset ds;
  ds.k = spec.k;
  const auto rows = static_cast<Eigen::Index>(spec.k * spec.per_class_count);
  ds.features.resize(rows, static_cast<Eigen::Index>(spec.feature_count));
  ds.labels.reserve(static_cast<std::size_t>(rows));
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < spec.k; ++c) {
    const double mean = static_cast<double>(c) * spec.class_mean_separation;
    for (std::size_t i = 0; i < spec.per_class_count; ++i, ++r) {
      for (Eigen::Index f = 0; f < ds.features.cols(); ++f) ds.features(r, f) = mean + noise(rng);
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  for (std::size_t f = 0; f < spec.feature_count; ++f) ds.feature_names.push_back("f" + std::to_string(f));
  return ds;
}

}  // namespace fedae
