#pragma once

#include "fedae/federation.hpp"

#include <filesystem>
#include <istream>

namespace fedae {

// INI-style experiment description:
//
//   [experiment]
//   rounds = 21
//   seed = 42
//   encoder_hidden = 105, 90, 75, 60
//   bottleneck = 10
//
//   [client.ciciot2023]
//   csv = data/ciciot2023.csv      ; relative to the config file
//   label_col = label
//   k = 2
//   d = 98
//   test_per_class = 6000
//
// A client uses either `csv` or the synth_* keys. '#' and ';' start comments.
// Errors raise ConfigError carrying the offending line.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace fedae
