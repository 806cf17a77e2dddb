#include "fedae/config.hpp"

#include "fedae/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace fedae {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> entries;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Strips a trailing comment outside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#' || c == ';') {
      return line.substr(0, i);
    }
  }
  return line;
}

class Fields {
 public:
  Fields(const Section& section, std::set<std::string> allowed) : section_(section) {
    for (const auto& [key, entry] : section.entries) {
      if (!allowed.count(key)) {
        throw ConfigError("unknown key '" + key + "' in section [" + section.name + "]", entry.line);
      }
    }
  }

  bool has(const std::string& key) const { return section_.entries.count(key) > 0; }

  std::string text(const std::string& key) const { return section_.entries.at(key).value; }

  std::uint64_t unsigned_int(const std::string& key) const {
    const auto& e = section_.entries.at(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
      throw ConfigError("field '" + key + "' expects a non-negative integer, got '" + e.value + "'", e.line);
    }
    return v;
  }

  std::size_t positive_int(const std::string& key) const {
    const auto v = unsigned_int(key);
    if (v == 0) throw ConfigError("field '" + key + "' must be positive", line(key));
    return static_cast<std::size_t>(v);
  }

  double real(const std::string& key) const {
    const auto& e = section_.entries.at(key);
    double v = 0.0;
    const char* first = e.value.data();
    if (!e.value.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size() || !std::isfinite(v)) {
      throw ConfigError("field '" + key + "' expects a real number, got '" + e.value + "'", e.line);
    }
    return v;
  }

  double positive_real(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0)) throw ConfigError("field '" + key + "' must be positive", line(key));
    return v;
  }

  std::vector<std::size_t> int_list(const std::string& key) const {
    const auto& e = section_.entries.at(key);
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= e.value.size()) {
      auto end = e.value.find(',', start);
      if (end == std::string::npos) end = e.value.size();
      const std::string item = trim(std::string_view(e.value).substr(start, end - start));
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
        throw ConfigError("field '" + key + "' expects a comma-separated list of positive integers", e.line);
      }
      out.push_back(v);
      start = end + 1;
    }
    return out;
  }

  int line(const std::string& key) const { return section_.entries.at(key).line; }

 private:
  const Section& section_;
};

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<Section> sections;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError("empty section name", line_no);
      for (const auto& s : sections) {
        if (s.name == name) throw ConfigError("duplicate section [" + name + "]", line_no);
      }
      sections.push_back(Section{name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    if (sections.empty()) throw ConfigError("key outside of any section", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(line).substr(eq + 1)));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    if (!sections.back().entries.emplace(key, Entry{value, line_no}).second) {
      throw ConfigError("duplicate key '" + key + "'", line_no);
    }
  }

  ExperimentConfig config;
  bool saw_experiment = false;
  for (const auto& section : sections) {
    if (section.name == "experiment") {
      saw_experiment = true;
      Fields f(section, {"rounds", "seed", "learning_rate", "beta1", "beta2", "epsilon", "batch_size",
                         "encoder_hidden", "bottleneck", "kmeans_max_iter", "kmeans_tol"});
      if (f.has("rounds")) config.rounds = f.positive_int("rounds");
      if (f.has("seed")) config.seed = f.unsigned_int("seed");
      if (f.has("learning_rate")) config.optimizer.learning_rate = f.positive_real("learning_rate");
      if (f.has("beta1")) config.optimizer.beta1 = f.real("beta1");
      if (f.has("beta2")) config.optimizer.beta2 = f.real("beta2");
      if (f.has("epsilon")) config.optimizer.epsilon = f.positive_real("epsilon");
      if (f.has("batch_size")) config.optimizer.batch_size = f.positive_int("batch_size");
      if (f.has("encoder_hidden")) config.encoder_hidden = f.int_list("encoder_hidden");
      if (f.has("bottleneck")) config.bottleneck_dim = f.positive_int("bottleneck");
      if (f.has("kmeans_max_iter")) config.kmeans.max_iter = f.positive_int("kmeans_max_iter");
      if (f.has("kmeans_tol")) config.kmeans.tol = f.positive_real("kmeans_tol");
      try {
        config.optimizer.validate();
      } catch (const Error& e) {
        throw ConfigError(e.what(), section.line);
      }
      continue;
    }
    if (section.name.rfind("client.", 0) != 0) {
      throw ConfigError("unknown section [" + section.name + "]", section.line);
    }
    ClientDescriptor desc;
    desc.name = section.name.substr(7);
    if (desc.name.empty()) throw ConfigError("client section needs a name: [client.<name>]", section.line);
    Fields f(section, {"csv", "label_col", "synth_k", "synth_features", "synth_per_class", "synth_separation",
                       "synth_noise", "synth_seed", "k", "d", "test_per_class", "train_fraction", "epochs_train",
                       "epochs_repair", "encoder_hidden", "bottleneck"});
    const bool synth = f.has("synth_k") || f.has("synth_features") || f.has("synth_per_class");
    if (f.has("csv") && synth) {
      throw ConfigError("client '" + desc.name + "' sets both csv and synth_* keys", f.line("csv"));
    }
    if (f.has("csv")) {
      std::filesystem::path p = f.text("csv");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      CsvSource src{p.string(), std::string("label")};
      if (f.has("label_col")) src.label_column = parse_label_column(f.text("label_col"));
      desc.source = std::move(src);
    } else if (synth) {
      SynthSpec s;
      for (const char* key : {"synth_k", "synth_features", "synth_per_class"}) {
        if (!f.has(key)) throw ConfigError("client '" + desc.name + "' is missing " + key, section.line);
      }
      s.k = f.positive_int("synth_k");
      s.feature_count = f.positive_int("synth_features");
      s.per_class_count = f.positive_int("synth_per_class");
      if (f.has("synth_separation")) s.class_mean_separation = f.positive_real("synth_separation");
      if (f.has("synth_noise")) s.noise_std = f.positive_real("synth_noise");
      s.seed = f.has("synth_seed") ? f.unsigned_int("synth_seed") : config.clients.size() + 1;
      if (s.k < 2) throw ConfigError("synth_k must be at least 2", f.line("synth_k"));
      desc.source = s;
    } else {
      throw ConfigError("client '" + desc.name + "' needs either csv or synth_* keys", section.line);
    }
    if (f.has("k")) desc.k = f.positive_int("k");
    if (f.has("d")) desc.d = f.positive_real("d");
    if (!f.has("test_per_class")) {
      throw ConfigError("client '" + desc.name + "' is missing test_per_class", section.line);
    }
    desc.test_per_class = f.positive_int("test_per_class");
    if (f.has("train_fraction")) {
      desc.train_fraction = f.real("train_fraction");
      if (!(desc.train_fraction > 0.0 && desc.train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0,1)", f.line("train_fraction"));
      }
    }
    if (f.has("epochs_train")) desc.epochs_train = f.positive_int("epochs_train");
    if (f.has("epochs_repair")) desc.epochs_repair = static_cast<std::size_t>(f.unsigned_int("epochs_repair"));
    if (f.has("encoder_hidden")) desc.encoder_hidden = f.int_list("encoder_hidden");
    if (f.has("bottleneck")) desc.bottleneck_dim = f.positive_int("bottleneck");
    config.clients.push_back(std::move(desc));
  }
  if (!saw_experiment) throw ConfigError("missing [experiment] section");
  if (config.clients.empty()) throw ConfigError("no [client.<name>] sections");
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  return parse_config(in, path.parent_path());
}

}  // namespace fedae
