#pragma once

#include "fedae/neuralnet.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fedae {

// FEDAE container:
//   "FEDAE" | u32 version | u32 layer_count |
//   per layer: u32 fan_in | u32 fan_out | f64 weight[fan_in*fan_out] (row-major) | f64 bias[fan_out]
// All integers and reals little-endian.
inline constexpr char kModelMagic[5] = {'F', 'E', 'D', 'A', 'E'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_layers(const std::vector<LayerWeights>& layers);

// Throws FormatError on bad magic, unsupported version, truncation or
// trailing bytes.
std::vector<LayerWeights> deserialize_layers(const std::vector<std::uint8_t>& bytes);

// Recovers the mirrored spec from a layer list; throws FormatError if the
// chain is not a mirrored autoencoder.
AutoencoderSpec infer_spec(const std::vector<LayerWeights>& layers);

void save_model(const AutoencoderModel& model, const std::filesystem::path& path);
std::vector<LayerWeights> read_model_layers(const std::filesystem::path& path);
AutoencoderModel load_model(const std::filesystem::path& path);

}  // namespace fedae
