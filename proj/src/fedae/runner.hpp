#pragma once

#include "fedae/federation.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace fedae {

struct RunOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::optional<std::size_t> rounds;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> label_col;  // overrides every csv client's label column
  bool dump_cm = false;
  bool dump_centroids = false;
  std::size_t threads = 0;
};

// One rounds.jsonl record. Key set is fixed: round, server_accuracy, clients[]
// with name, accuracy, precision, recall, f1, macro_precision, macro_recall,
// macro_f1, per_class, confusion_matrix, best_mapping_applied, mapping,
// test_size, train_loss, repair_loss, kmeans_inertia.
nlohmann::json round_to_json(const RoundReport& report);

nlohmann::json summary_to_json(const ExperimentConfig& config, const ExperimentResult& result);

// Loads the config, applies overrides and runs the experiment, streaming
// <out>/rounds.jsonl, then writing final models to <out>/models/<client>.fedae
// and <out>/summary.json. summary.json only appears when every step succeeded.
ExperimentResult run_to_directory(const RunOptions& options);

}  // namespace fedae
