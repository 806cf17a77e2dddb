#pragma once

#include "fedae/clustering.hpp"
#include "fedae/dataprep.hpp"
#include "fedae/evaluation.hpp"
#include "fedae/neuralnet.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fedae {

// Every layer except the first and the last; these are the layers whose
// shapes are shared across clients.
using CommonLayerSet = std::vector<LayerWeights>;

struct ClientState {
  std::string name;
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;  // class-ordered blocks of test_per_class rows
  AutoencoderModel model;
  std::size_t k = 2;
  double d = 1.0;
  std::size_t test_per_class = 1;
  std::size_t epochs_train = 2;
  std::size_t epochs_repair = 2;

  std::size_t test_size() const { return test.rows(); }
  void validate() const;
};

CommonLayerSet common_layers(const AutoencoderModel& model);

// Weighted mean sum_c (d_c / sum d) * W_c, computed parameter by parameter.
CommonLayerSet aggregate(std::span<const CommonLayerSet> sets, std::span<const double> d);

// Replaces the interior layers, keeping the client's first and last layer.
void splice(AutoencoderModel& model, const CommonLayerSet& averaged);

struct RepairOutcome {
  TrainingReport training;
  bool private_layers_preserved = false;  // first/last bitwise unchanged by the splice
  double spliced_validation_loss = 0.0;
  double repaired_validation_loss = 0.0;
};

// Splices `averaged` into the client model and fine-tunes the whole model on
// the validation split for client.epochs_repair epochs.
RepairOutcome splice_and_repair(ClientState& client, const CommonLayerSet& averaged,
                                const OptimizerConfig& opt, std::uint64_t seed);

struct ClientRoundReport {
  std::string name;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  MetricSet metrics;
  ConfusionMatrix confusion;
  bool best_mapping_applied = false;
  std::vector<int> mapping;
  std::size_t test_size = 0;
  double train_loss = 0.0;
  double repair_loss = 0.0;
  double kmeans_inertia = 0.0;
  Matrix centroids;
  bool private_layers_preserved = false;
};

struct RoundReport {
  std::size_t round_index = 0;
  std::vector<ClientRoundReport> clients;
  double server_accuracy = 0.0;
};

struct RoundOptions {
  OptimizerConfig optimizer;
  KMeansOptions kmeans;
  // Upper bound on concurrently running clients; 0 picks the hardware count.
  std::size_t threads = 0;
};

// Local training, common-layer aggregation, splice and repair, then latent
// K-means with label alignment for every client. Any client failure aborts
// the round with the client's name in the message.
RoundReport run_round(std::vector<ClientState>& clients, const RoundOptions& options, std::uint64_t seed,
                      std::size_t round_index);

// Clustering plus alignment on a client's current model.
ClientRoundReport evaluate_client(const ClientState& client, const KMeansOptions& kmeans, std::uint64_t seed);

struct CsvSource {
  std::string path;
  LabelColumn label_column = std::string("label");
};

struct ClientDescriptor {
  std::string name;
  std::variant<CsvSource, SynthSpec> source;
  std::size_t k = 0;            // 0: class count of the data
  std::optional<double> d;      // unset: training sample count
  std::size_t test_per_class = 0;
  double train_fraction = 0.8;
  std::size_t epochs_train = 2;
  std::size_t epochs_repair = 2;
  std::optional<std::vector<std::size_t>> encoder_hidden;
  std::optional<std::size_t> bottleneck_dim;
};

struct ExperimentConfig {
  std::vector<ClientDescriptor> clients;
  std::size_t rounds = 21;
  std::uint64_t seed = 42;
  OptimizerConfig optimizer;
  std::vector<std::size_t> encoder_hidden{105, 90, 75, 60};
  std::size_t bottleneck_dim = 10;
  KMeansOptions kmeans;
  std::size_t threads = 0;

  void validate() const;
};

// Loads or generates each client's data, partitions it, fits the scaler on
// the training split and builds the round-0 model.
std::vector<ClientState> prepare_clients(const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<RoundReport> rounds;
  // Per client, the round with the highest aligned accuracy (earliest on ties).
  std::vector<std::size_t> best_rounds;
  std::vector<ClientState> clients;  // final state
};

using RoundCallback = std::function<void(const RoundReport&)>;

ExperimentResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round = {});
ExperimentResult run_experiment(std::vector<ClientState> clients, const ExperimentConfig& config,
                                const RoundCallback& on_round = {});

// Index of the first maximum accuracy for client `client` over `rounds`.
std::size_t best_round(const std::vector<RoundReport>& rounds, std::size_t client);

}  // namespace fedae
