// fedae command-line front end. Talks to the library only through the C API.

#include "fedae/fedae.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string with_commas(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

void report(const char* what, fedae_status status) {
  std::cerr << "fedae " << what << ": " << fedae_status_string(status) << ": " << fedae_last_error() << '\n';
}

std::size_t threads_from_env() {
  const char* env = std::getenv("FEDAE_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    return static_cast<std::size_t>(std::stoul(env));
  } catch (const std::exception&) {
    std::cerr << "fedae: ignoring invalid FEDAE_THREADS='" << env << "'\n";
    return 0;
  }
}

struct RunArgs {
  std::string config;
  std::string out;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::string label_col;
  bool dump_cm = false;
  bool dump_centroids = false;
};

int cmd_run(const RunArgs& args, bool has_seed, bool has_label_col) {
  fedae_run_options opts;
  fedae_run_options_init(&opts);
  opts.config_path = args.config.c_str();
  opts.out_dir = args.out.c_str();
  opts.rounds = args.rounds;
  opts.has_seed = has_seed ? 1 : 0;
  opts.seed = args.seed;
  opts.label_col = has_label_col ? args.label_col.c_str() : nullptr;
  opts.dump_cm = args.dump_cm ? 1 : 0;
  opts.dump_centroids = args.dump_centroids ? 1 : 0;
  opts.threads = threads_from_env();

  fedae_run_result* raw = nullptr;
  const fedae_status status = fedae_run(&opts, &raw);
  if (status != FEDAE_OK) {
    report("run", status);
    return status == FEDAE_ERR_CONFIG ? kExitUsage : kExitRuntime;
  }
  std::unique_ptr<fedae_run_result, decltype(&fedae_run_result_free)> result(raw, fedae_run_result_free);
  const std::size_t rounds = fedae_run_result_round_count(result.get());
  for (std::size_t c = 0; c < fedae_run_result_client_count(result.get()); ++c) {
    const std::size_t best = fedae_run_result_best_round(result.get(), c);
    std::printf("%-20s best round %zu  accuracy %.4f  f1 %.4f\n", fedae_run_result_client_name(result.get(), c),
                best, fedae_run_result_accuracy(result.get(), best, c), fedae_run_result_f1(result.get(), best, c));
  }
  std::printf("server accuracy (final round): %.4f\n", fedae_run_result_server_accuracy(result.get(), rounds - 1));
  std::printf("wrote %s/rounds.jsonl (%zu rounds) and %s/summary.json\n", args.out.c_str(), rounds,
              args.out.c_str());
  return 0;
}

int cmd_synth(const fedae_synth_spec& spec, const std::string& out) {
  const fedae_status status = fedae_synth_write_csv(&spec, out.c_str());
  if (status != FEDAE_OK) {
    report("synth", status);
    return status == FEDAE_ERR_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
  }
  return 0;
}

int cmd_inspect(const std::string& path) {
  fedae_model* raw = nullptr;
  const fedae_status status = fedae_model_load(path.c_str(), &raw);
  if (status != FEDAE_OK) {
    report("inspect", status);
    return status == FEDAE_ERR_FORMAT ? kExitUsage : kExitRuntime;
  }
  std::unique_ptr<fedae_model, decltype(&fedae_model_free)> model(raw, fedae_model_free);
  const std::size_t layers = fedae_model_layer_count(model.get());
  const std::size_t bottleneck = (layers - 2) / 2;
  std::printf("%-12s %-12s %12s\n", "Layer", "Output", "Param #");
  std::printf("%-12s %-12zu %12s\n", "input", fedae_model_input_dim(model.get()), "0");
  for (std::size_t i = 0; i < layers; ++i) {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    fedae_model_layer_shape(model.get(), i, &fan_in, &fan_out);
    std::string name = "dense_" + std::to_string(i);
    if (i == 0) name = "first";
    if (i == bottleneck) name = "bottleneck";
    if (i + 1 == layers) name = "last";
    std::printf("%-12s %-12zu %12s\n", name.c_str(), fan_out, with_commas(fan_in * fan_out + fan_out).c_str());
  }
  std::printf("Total params: %s\n", with_commas(fedae_model_param_count(model.get())).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated autoencoder anomaly detection over heterogeneous clients"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fedae_version());

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a federated experiment from a config file");
  run_cmd->add_option("--config", run.config, "Experiment config file")->required();
  run_cmd->add_option("--out", run.out, "Output directory (created if absent)")->required();
  auto* rounds_opt = run_cmd->add_option("--rounds", run.rounds, "Override the number of rounds");
  rounds_opt->check(CLI::PositiveNumber);
  auto* seed_opt = run_cmd->add_option("--seed", run.seed, "Override the experiment seed");
  auto* label_opt = run_cmd->add_option("--label-col", run.label_col, "Label column (name or zero-based index)");
  run_cmd->add_flag("--dump-cm", run.dump_cm, "Write per-round confusion matrices as CSV");
  run_cmd->add_flag("--dump-centroids", run.dump_centroids, "Write per-round K-means centroids as CSV");

  fedae_synth_spec synth;
  fedae_synth_spec_init(&synth);
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled Gaussian-cluster CSV");
  synth_cmd->add_option("--k", synth.k, "Class count")->required();
  synth_cmd->add_option("--per-class", synth.per_class, "Rows per class")->required();
  synth_cmd->add_option("--features", synth.features, "Feature count")->required();
  synth_cmd->add_option("--separation", synth.separation, "Distance between consecutive class means per coordinate");
  synth_cmd->add_option("--noise", synth.noise, "Per-coordinate standard deviation");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth_out, "Output CSV path")->required();

  std::string model_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print the layer layout of a FEDAE model file");
  inspect_cmd->add_option("model", model_path, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*run_cmd) return cmd_run(run, seed_opt->count() > 0, label_opt->count() > 0);
  if (*synth_cmd) return cmd_synth(synth, synth_out);
  if (*inspect_cmd) return cmd_inspect(model_path);
  return kExitUsage;
}
