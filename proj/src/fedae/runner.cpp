#include "fedae/runner.hpp"

#include "fedae/config.hpp"
#include "fedae/error.hpp"
#include "fedae/persistence.hpp"

#include <fstream>
#include <iomanip>
#include <limits>

namespace fedae {

namespace fs = std::filesystem;

namespace {

nlohmann::json headline(const ClientRoundReport& c) {
  return {{"accuracy", c.accuracy}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

void write_confusion_csv(const fs::path& path, const ConfusionMatrix& cm) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "true\\pred";
  for (std::size_t j = 0; j < cm.k(); ++j) out << ',' << j;
  out << '\n';
  for (std::size_t i = 0; i < cm.k(); ++i) {
    out << i;
    for (std::size_t j = 0; j < cm.k(); ++j) out << ',' << cm.counts[i][j];
    out << '\n';
  }
}

void create_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

nlohmann::json round_to_json(const RoundReport& report) {
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& c : report.clients) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& pc : c.metrics.per_class) {
      per_class.push_back({{"precision", pc.precision}, {"recall", pc.recall}, {"f1", pc.f1}});
    }
    clients.push_back({{"name", c.name},
                       {"accuracy", c.accuracy},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"macro_precision", c.metrics.macro_precision},
                       {"macro_recall", c.metrics.macro_recall},
                       {"macro_f1", c.metrics.macro_f1},
                       {"per_class", per_class},
                       {"confusion_matrix", c.confusion.counts},
                       {"best_mapping_applied", c.best_mapping_applied},
                       {"mapping", c.mapping},
                       {"test_size", c.test_size},
                       {"train_loss", c.train_loss},
                       {"repair_loss", c.repair_loss},
                       {"kmeans_inertia", c.kmeans_inertia}});
  }
  return {{"round", report.round_index}, {"server_accuracy", report.server_accuracy}, {"clients", clients}};
}

nlohmann::json summary_to_json(const ExperimentConfig& config, const ExperimentResult& result) {
  if (result.rounds.empty()) throw InvalidArgument("summary: no rounds");
  const auto& final_round = result.rounds.back();
  nlohmann::json clients = nlohmann::json::array();
  for (std::size_t c = 0; c < result.clients.size(); ++c) {
    const auto& state = result.clients[c];
    const std::size_t best = result.best_rounds.at(c);
    clients.push_back({{"name", state.name},
                       {"k", state.k},
                       {"d", state.d},
                       {"input_dim", state.model.input_dim()},
                       {"param_count", state.model.param_count()},
                       {"test_size", state.test_size()},
                       {"best_round", best},
                       {"best", headline(result.rounds[best].clients[c])},
                       {"final", headline(final_round.clients[c])}});
  }
  std::size_t server_best = 0;
  for (std::size_t r = 1; r < result.rounds.size(); ++r) {
    if (result.rounds[r].server_accuracy > result.rounds[server_best].server_accuracy) server_best = r;
  }
  return {{"rounds", result.rounds.size()},
          {"seed", config.seed},
          {"clients", clients},
          {"server",
           {{"best_round", server_best},
            {"best_accuracy", result.rounds[server_best].server_accuracy},
            {"final_accuracy", final_round.server_accuracy}}}};
}

ExperimentResult run_to_directory(const RunOptions& options) {
  auto config = load_config(options.config_path);
  if (options.rounds) {
    if (*options.rounds == 0) throw ConfigError("--rounds must be at least 1");
    config.rounds = *options.rounds;
  }
  if (options.seed) config.seed = *options.seed;
  if (options.label_col) {
    for (auto& c : config.clients) {
      if (auto* csv = std::get_if<CsvSource>(&c.source)) csv->label_column = parse_label_column(*options.label_col);
    }
  }
  config.threads = options.threads;

  const fs::path& out = options.out_dir;
  create_dir(out);
  const fs::path summary_path = out / "summary.json";
  std::error_code ec;
  fs::remove(summary_path, ec);
  if (options.dump_cm) create_dir(out / "confusion");
  if (options.dump_centroids) create_dir(out / "centroids");

  std::ofstream rounds(out / "rounds.jsonl", std::ios::trunc);
  if (!rounds) throw IoError("cannot open " + (out / "rounds.jsonl").string() + " for writing");

  auto clients = prepare_clients(config);
  auto result = run_experiment(std::move(clients), config, [&](const RoundReport& report) {
    rounds << round_to_json(report).dump() << '\n';
    rounds.flush();
    if (!rounds) throw IoError("write failed: rounds.jsonl");
    for (const auto& c : report.clients) {
      const std::string stem = "round_" + std::to_string(report.round_index) + "_" + c.name + ".csv";
      if (options.dump_cm) write_confusion_csv(out / "confusion" / stem, c.confusion);
      if (options.dump_centroids) write_matrix_csv(out / "centroids" / stem, c.centroids);
    }
  });

  create_dir(out / "models");
  for (const auto& c : result.clients) save_model(c.model, out / "models" / (c.name + ".fedae"));

  const fs::path tmp = out / "summary.json.tmp";
  {
    std::ofstream s(tmp, std::ios::trunc);
    if (!s) throw IoError("cannot open " + tmp.string() + " for writing");
    s << summary_to_json(config, result).dump(2) << '\n';
    if (!s) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, summary_path, ec);
  if (ec) throw IoError("cannot finalize summary.json: " + ec.message());
  return result;
}

}  // namespace fedae
