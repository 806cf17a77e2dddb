#include "fedae/persistence.hpp"

#include "fedae/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace fedae {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw FormatError(std::string("truncated model file while reading ") + what);
    }
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_layers(const std::vector<LayerWeights>& layers) {
  std::vector<std::uint8_t> out(std::begin(kModelMagic), std::end(kModelMagic));
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.fan_in()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.fan_out()));
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) put<double>(out, l.weight.data()[k]);
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) put<double>(out, l.bias[k]);
  }
  return out;
}

std::vector<LayerWeights> deserialize_layers(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kModelMagic) ||
      std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
    throw FormatError("bad magic: not a FEDAE model file");
  }
  const std::vector<std::uint8_t> body(bytes.begin() + sizeof(kModelMagic), bytes.end());
  Reader in(body);
  const auto version = in.get<std::uint32_t>("version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported FEDAE format version " + std::to_string(version));
  }
  const auto count = in.get<std::uint32_t>("layer count");
  std::vector<LayerWeights> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto fan_in = in.get<std::uint32_t>("fan_in");
    const auto fan_out = in.get<std::uint32_t>("fan_out");
    const std::size_t needed = (std::size_t{fan_in} * fan_out + fan_out) * sizeof(double);
    if (in.remaining() < needed) {
      throw FormatError("truncated model file in layer " + std::to_string(i));
    }
    LayerWeights l{Matrix(fan_in, fan_out), Vector(fan_out)};
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) l.weight.data()[k] = in.get<double>("weight");
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = in.get<double>("bias");
    layers.push_back(std::move(l));
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after last layer");
  return layers;
}

AutoencoderSpec infer_spec(const std::vector<LayerWeights>& layers) {
  const std::size_t n = layers.size();
  if (n < 4 || n % 2 != 0) {
    throw FormatError("layer count " + std::to_string(n) + " is not a mirrored autoencoder");
  }
  std::vector<std::size_t> widths{layers.front().fan_in()};
  for (std::size_t i = 0; i < n; ++i) {
    if (layers[i].fan_in() != widths.back()) {
      throw FormatError("layer " + std::to_string(i) + " does not chain with its predecessor");
    }
    widths.push_back(layers[i].fan_out());
  }
  for (std::size_t i = 0; i <= n; ++i) {
    if (widths[i] != widths[n - i]) throw FormatError("layer widths are not mirrored");
  }
  AutoencoderSpec spec;
  spec.input_dim = widths.front();
  spec.encoder_hidden.assign(widths.begin() + 1, widths.begin() + static_cast<std::ptrdiff_t>(n / 2));
  spec.bottleneck_dim = widths[n / 2];
  return spec;
}

void save_model(const AutoencoderModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_layers(model.layers());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<LayerWeights> read_model_layers(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_layers(bytes);
}

AutoencoderModel load_model(const std::filesystem::path& path) {
  auto layers = read_model_layers(path);
  auto spec = infer_spec(layers);
  return AutoencoderModel(std::move(spec), std::move(layers));
}

}  // namespace fedae
