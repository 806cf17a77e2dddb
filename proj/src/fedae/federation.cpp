#include "fedae/federation.hpp"

#include "fedae/alignment.hpp"
#include "fedae/error.hpp"
#include "fedae/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <numeric>
#include <thread>

namespace fedae {

namespace {

enum class SeedStream : std::uint64_t { init = 1, train = 2, repair = 3, kmeans = 4, split = 5 };

std::uint64_t stream_seed(std::uint64_t seed, std::size_t round, std::size_t client, SeedStream s) {
  return derive_seed(seed, {round, client, static_cast<std::uint64_t>(s)});
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(jobs, 1));
}

// Runs job(i) for every client index; errors are re-thrown in client order
// once every worker has finished.
template <typename Job>
void for_each_client(std::vector<ClientState>& clients, std::size_t threads, Job job) {
  const std::size_t n = clients.size();
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = worker_count(threads, n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw Error("client '" + clients[i].name + "': " + e.what());
    }
  }
}

}  // namespace

void ClientState::validate() const {
  if (model.input_dim() != train.feature_count()) {
    throw ShapeError("client '" + name + "': model input_dim " + std::to_string(model.input_dim()) +
                     " differs from feature count " + std::to_string(train.feature_count()));
  }
  if (!(d > 0.0)) throw InvalidArgument("client '" + name + "': aggregation weight d must be positive");
  if (k == 0) throw InvalidArgument("client '" + name + "': k must be positive");
  if (test.rows() != k * test_per_class) {
    throw ShapeError("client '" + name + "': test split is not k blocks of test_per_class rows");
  }
}

CommonLayerSet common_layers(const AutoencoderModel& model) {
  const auto& layers = model.layers();
  return CommonLayerSet(layers.begin() + 1, layers.end() - 1);
}

CommonLayerSet aggregate(std::span<const CommonLayerSet> sets, std::span<const double> d) {
  if (sets.empty()) throw InvalidArgument("aggregate: no client layer sets");
  if (sets.size() != d.size()) {
    throw InvalidArgument("aggregate: " + std::to_string(sets.size()) + " layer sets but " +
                          std::to_string(d.size()) + " weights");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < d.size(); ++c) {
    if (!(d[c] > 0.0) || !std::isfinite(d[c])) {
      throw InvalidArgument("aggregate: weight of client " + std::to_string(c) + " must be positive");
    }
    total += d[c];
  }
  const auto& ref = sets.front();
  for (std::size_t c = 1; c < sets.size(); ++c) {
    if (sets[c].size() != ref.size()) {
      throw ShapeError("aggregate: client " + std::to_string(c) + " submitted " + std::to_string(sets[c].size()) +
                       " common layers, expected " + std::to_string(ref.size()));
    }
    for (std::size_t l = 0; l < ref.size(); ++l) {
      if (sets[c][l].fan_in() != ref[l].fan_in() || sets[c][l].fan_out() != ref[l].fan_out() ||
          sets[c][l].bias.size() != ref[l].bias.size()) {
        throw ShapeError("aggregate: common layer " + std::to_string(l) + " of client " + std::to_string(c) +
                         " is " + std::to_string(sets[c][l].fan_in()) + "x" + std::to_string(sets[c][l].fan_out()) +
                         ", expected " + std::to_string(ref[l].fan_in()) + "x" + std::to_string(ref[l].fan_out()));
      }
    }
  }

  CommonLayerSet out;
  out.reserve(ref.size());
  for (std::size_t l = 0; l < ref.size(); ++l) {
    // W_0 + sum_c (d_c / sum d) (W_c - W_0): the same convex combination,
    // exact when every client submits identical parameters.
    LayerWeights acc = sets[0][l];
    for (std::size_t c = 1; c < sets.size(); ++c) {
      const double coeff = d[c] / total;
      acc.weight += coeff * (sets[c][l].weight - sets[0][l].weight);
      acc.bias += coeff * (sets[c][l].bias - sets[0][l].bias);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

void splice(AutoencoderModel& model, const CommonLayerSet& averaged) {
  if (averaged.size() + 2 != model.layer_count()) {
    throw ShapeError("splice: " + std::to_string(averaged.size()) + " common layers for a " +
                     std::to_string(model.layer_count()) + "-layer model");
  }
  auto layers = model.export_layers();
  std::copy(averaged.begin(), averaged.end(), layers.begin() + 1);
  model.import_layers(layers);
}

RepairOutcome splice_and_repair(ClientState& client, const CommonLayerSet& averaged, const OptimizerConfig& opt,
                                std::uint64_t seed) {
  const LayerWeights first = client.model.layer(0);
  const LayerWeights last = client.model.layer(client.model.layer_count() - 1);
  splice(client.model, averaged);

  RepairOutcome out;
  out.private_layers_preserved = bitwise_equal(first, client.model.layer(0)) &&
                                 bitwise_equal(last, client.model.layer(client.model.layer_count() - 1));
  const Matrix& val = client.validation.features;
  if (val.rows() > 0) out.spliced_validation_loss = mse_loss(val, forward(client.model, val));
  if (client.epochs_repair > 0 && val.rows() > 0) {
    out.training = train(client.model, val, client.epochs_repair, opt, seed);
  }
  out.repaired_validation_loss = val.rows() > 0 ? mse_loss(val, forward(client.model, val)) : 0.0;
  return out;
}

ClientRoundReport evaluate_client(const ClientState& client, const KMeansOptions& kmeans, std::uint64_t seed) {
  const Matrix latent = encode(client.model, client.test.features);
  const auto clusters = kmeans_fit(latent, client.k, seed, kmeans);
  const auto aligned = client.k == 2
                           ? align_binary(client.test.labels, clusters.labels)
                           : align_multiclass(client.test.labels, clusters.labels, client.k, client.test_per_class);

  ClientRoundReport r;
  r.name = client.name;
  r.confusion = confusion(client.test.labels, aligned.labels, client.k);
  r.metrics = metrics(r.confusion);
  r.accuracy = aligned.accuracy;
  r.precision = r.metrics.precision;
  r.recall = r.metrics.recall;
  r.f1 = r.metrics.f1;
  r.best_mapping_applied = aligned.corrected;
  if (aligned.corrected && aligned.mapping) {
    r.mapping = *aligned.mapping;
  } else {
    r.mapping.resize(client.k);
    std::iota(r.mapping.begin(), r.mapping.end(), 0);
  }
  r.test_size = client.test_size();
  r.kmeans_inertia = clusters.inertia;
  r.centroids = clusters.centroids;
  return r;
}

RoundReport run_round(std::vector<ClientState>& clients, const RoundOptions& options, std::uint64_t seed,
                      std::size_t round_index) {
  if (clients.empty()) throw InvalidArgument("run_round: no clients");
  for (const auto& c : clients) c.validate();
  const std::size_t n = clients.size();

  std::vector<TrainingReport> trained(n);
  for_each_client(clients, options.threads, [&](std::size_t i) {
    auto& c = clients[i];
    trained[i] = train(c.model, c.train.features, c.epochs_train, options.optimizer,
                       stream_seed(seed, round_index, i, SeedStream::train));
  });

  // Barrier: aggregation sees every client's freshly trained interior.
  std::vector<CommonLayerSet> sets;
  std::vector<double> d;
  sets.reserve(n);
  for (const auto& c : clients) {
    sets.push_back(common_layers(c.model));
    d.push_back(c.d);
  }
  CommonLayerSet averaged;
  try {
    averaged = aggregate(sets, d);
  } catch (const ShapeError& e) {
    throw ShapeError(std::string(e.what()) + " (clients must share the hidden chain)");
  }

  RoundReport report;
  report.round_index = round_index;
  report.clients.resize(n);
  for_each_client(clients, options.threads, [&](std::size_t i) {
    auto& c = clients[i];
    const auto repair =
        splice_and_repair(c, averaged, options.optimizer, stream_seed(seed, round_index, i, SeedStream::repair));
    auto r = evaluate_client(c, options.kmeans, stream_seed(seed, round_index, i, SeedStream::kmeans));
    r.train_loss = trained[i].epoch_losses.empty() ? 0.0 : trained[i].epoch_losses.back();
    r.repair_loss = repair.training.epoch_losses.empty() ? repair.repaired_validation_loss
                                                         : repair.training.epoch_losses.back();
    r.private_layers_preserved = repair.private_layers_preserved;
    report.clients[i] = std::move(r);
  });

  std::vector<std::size_t> sizes;
  std::vector<double> accs;
  for (const auto& r : report.clients) {
    sizes.push_back(r.test_size);
    accs.push_back(r.accuracy);
  }
  report.server_accuracy = server_accuracy(sizes, accs);
  return report;
}

void ExperimentConfig::validate() const {
  if (clients.empty()) throw InvalidArgument("experiment needs at least one client");
  if (rounds == 0) throw InvalidArgument("rounds must be at least 1");
  optimizer.validate();
  for (const auto& c : clients) {
    if (c.name.empty()) throw InvalidArgument("client name must not be empty");
    if (c.test_per_class == 0) throw InvalidArgument("client '" + c.name + "': test_per_class must be positive");
    if (c.d && !(*c.d > 0.0)) throw InvalidArgument("client '" + c.name + "': d must be positive");
  }
}

std::vector<ClientState> prepare_clients(const ExperimentConfig& config) {
  config.validate();
  std::vector<ClientState> clients;
  clients.reserve(config.clients.size());
  for (std::size_t i = 0; i < config.clients.size(); ++i) {
    const auto& desc = config.clients[i];
    try {
      LabeledDataset data;
      if (const auto* csv = std::get_if<CsvSource>(&desc.source)) {
        data = load_csv(csv->path, csv->label_column).dataset;
      } else {
        data = synth_generate(std::get<SynthSpec>(desc.source));
      }
      const std::size_t k = desc.k == 0 ? data.k : desc.k;
      if (k != data.k) {
        throw DataError("k = " + std::to_string(k) + " but the data has " + std::to_string(data.k) + " classes");
      }
      auto parts = partition(data, SplitSpec{desc.test_per_class, desc.train_fraction,
                                             stream_seed(config.seed, 0, i, SeedStream::split)});
      if (parts.train.rows() == 0) throw DataError("training split is empty");
      const auto scaler = MinMaxScaler::fit(parts.train.features);
      parts.train.features = scaler.apply(parts.train.features);
      parts.validation.features = scaler.apply(parts.validation.features);
      parts.test.features = scaler.apply(parts.test.features);

      AutoencoderSpec spec;
      spec.input_dim = data.feature_count();
      spec.encoder_hidden = desc.encoder_hidden.value_or(config.encoder_hidden);
      spec.bottleneck_dim = desc.bottleneck_dim.value_or(config.bottleneck_dim);
      auto model = build_autoencoder(spec, stream_seed(config.seed, 0, i, SeedStream::init));

      const double d = desc.d.value_or(static_cast<double>(parts.train.rows()));
      clients.push_back(ClientState{desc.name, std::move(parts.train), std::move(parts.validation),
                                    std::move(parts.test), std::move(model), k, d, desc.test_per_class,
                                    desc.epochs_train, desc.epochs_repair});
    } catch (const std::exception& e) {
      throw DataError("client '" + desc.name + "': " + e.what());
    }
  }
  return clients;
}

std::size_t best_round(const std::vector<RoundReport>& rounds, std::size_t client) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < rounds.size(); ++r) {
    if (rounds[r].clients.at(client).accuracy > rounds[best].clients.at(client).accuracy) best = r;
  }
  return best;
}

ExperimentResult run_experiment(std::vector<ClientState> clients, const ExperimentConfig& config,
                                const RoundCallback& on_round) {
  if (config.rounds == 0) throw InvalidArgument("rounds must be at least 1");
  RoundOptions options{config.optimizer, config.kmeans, config.threads};
  ExperimentResult result;
  for (std::size_t r = 0; r < config.rounds; ++r) {
    result.rounds.push_back(run_round(clients, options, config.seed, r));
    if (on_round) on_round(result.rounds.back());
  }
  for (std::size_t c = 0; c < clients.size(); ++c) result.best_rounds.push_back(best_round(result.rounds, c));
  result.clients = std::move(clients);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round) {
  return run_experiment(prepare_clients(config), config, on_round);
}

}  // namespace fedae
