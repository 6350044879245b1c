#include "tattooed/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <set>

#include <json.hpp>

#include "tattooed/errors.hpp"

namespace tattooed {
namespace {

constexpr std::string_view kMagic = "TNSR0001";
constexpr std::size_t kPrefixBytes = 16;

static_assert(std::endian::native == std::endian::little,
              "tensor blobs are read and written as native little-endian f32");

std::size_t shape_elements(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void append_le64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void validate_manifest(const Manifest& manifest, std::size_t total_floats) {
  std::set<std::string, std::less<>> names;
  std::size_t expected_offset = 0;
  for (const auto& e : manifest) {
    if (e.name.empty()) throw FormatError("tensor with empty name");
    if (!names.insert(e.name).second) throw FormatError("duplicate tensor name '" + e.name + "'");
    if (e.offset % 4 != 0) throw FormatError("tensor '" + e.name + "' offset is not 4-byte aligned");
    if (e.offset != expected_offset) {
      throw FormatError("tensor '" + e.name + "' offset " + std::to_string(e.offset) +
                        " breaks contiguous ascending layout (expected " +
                        std::to_string(expected_offset) + ")");
    }
    if (e.byte_length != 4 * e.elements()) {
      throw FormatError("tensor '" + e.name + "' byte_length does not match its shape");
    }
    expected_offset += e.byte_length;
  }
  if (expected_offset != 4 * total_floats) {
    throw FormatError("manifest describes " + std::to_string(expected_offset / 4) +
                      " values, blob holds " + std::to_string(total_floats));
  }
}

}  // namespace

std::size_t TensorEntry::elements() const { return shape_elements(shape); }

void TensorContainer::add_tensor(std::string name, std::vector<std::size_t> shape,
                                 std::span<const float> values) {
  if (find(name) != size()) throw FormatError("duplicate tensor name '" + name + "'");
  if (shape_elements(shape) != values.size()) {
    throw FormatError("tensor '" + name + "' shape does not match value count");
  }
  TensorEntry e;
  e.name = std::move(name);
  e.shape = std::move(shape);
  e.offset = data_.size() * 4;
  e.byte_length = values.size() * 4;
  data_.insert(data_.end(), values.begin(), values.end());
  entries_.push_back(std::move(e));
}

std::span<const float> TensorContainer::tensor(std::size_t i) const {
  const auto& e = entries_.at(i);
  return std::span<const float>(data_).subspan(e.offset / 4, e.byte_length / 4);
}

std::span<float> TensorContainer::tensor(std::size_t i) {
  const auto& e = entries_.at(i);
  return std::span<float>(data_).subspan(e.offset / 4, e.byte_length / 4);
}

std::size_t TensorContainer::find(std::string_view name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const TensorEntry& e) { return e.name == name; });
  return static_cast<std::size_t>(it - entries_.begin());
}

std::string content_hash(std::span<const float> values) {
  return to_hex(sha256({reinterpret_cast<const std::uint8_t*>(values.data()),
                        values.size_bytes()}));
}

std::vector<std::uint8_t> serialize(const TensorContainer& container) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& e : container.manifest()) {
    tensors.push_back({{"name", e.name},
                       {"shape", e.shape},
                       {"dtype", "f32"},
                       {"offset", e.offset},
                       {"byte_length", e.byte_length}});
  }
  const std::string header = nlohmann::json{{"tensors", tensors}}.dump();

  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  append_le64(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  while (out.size() % 4 != 0) out.push_back(' ');
  const auto blob = container.data();
  const auto* raw = reinterpret_cast<const std::uint8_t*>(blob.data());
  out.insert(out.end(), raw, raw + blob.size_bytes());
  return out;
}

TensorContainer deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPrefixBytes ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("missing TNSR0001 magic");
  }
  std::uint64_t header_len = 0;
  for (int i = 7; i >= 0; --i) header_len = (header_len << 8) | bytes[8 + i];
  if (header_len > bytes.size() - kPrefixBytes) throw FormatError("header length exceeds file size");

  const auto* hp = reinterpret_cast<const char*>(bytes.data() + kPrefixBytes);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hp, hp + header_len);
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("manifest is not valid JSON: ") + ex.what());
  }

  Manifest manifest;
  try {
    for (const auto& t : header.at("tensors")) {
      if (t.at("dtype").get<std::string>() != "f32") {
        throw FormatError("unsupported dtype '" + t.at("dtype").get<std::string>() + "'");
      }
      TensorEntry e;
      e.name = t.at("name").get<std::string>();
      e.shape = t.at("shape").get<std::vector<std::size_t>>();
      e.offset = t.at("offset").get<std::size_t>();
      e.byte_length = t.at("byte_length").get<std::size_t>();
      manifest.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed manifest: ") + ex.what());
  }

  std::size_t blob_start = kPrefixBytes + header_len;
  blob_start += (4 - blob_start % 4) % 4;
  if (blob_start > bytes.size()) throw FormatError("truncated padding");
  const std::size_t blob_bytes = bytes.size() - blob_start;
  if (blob_bytes % 4 != 0) throw FormatError("blob length is not a multiple of 4");

  std::vector<float> values(blob_bytes / 4);
  std::memcpy(values.data(), bytes.data() + blob_start, blob_bytes);
  return unflatten(values, manifest);
}

TensorContainer load_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

void save_container(const TensorContainer& container, const std::filesystem::path& path) {
  const auto bytes = serialize(container);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

ParameterVector flatten(const TensorContainer& container) {
  ParameterVector v;
  v.values.assign(container.data().begin(), container.data().end());
  v.provenance = content_hash(v.values);
  return v;
}

TensorContainer unflatten(std::span<const float> values, const Manifest& manifest) {
  validate_manifest(manifest, values.size());
  TensorContainer c;
  c.entries_ = manifest;
  c.data_.assign(values.begin(), values.end());
  return c;
}

TensorContainer synth_model(std::span<const std::size_t> layer_sizes,
                            const Seed& init_seed) {
  if (layer_sizes.size() < 2) throw FormatError("synth_model needs at least two layer sizes");
  if (std::find(layer_sizes.begin(), layer_sizes.end(), 0U) != layer_sizes.end()) {
    throw FormatError("layer sizes must be positive");
  }
  KeyedStream stream(init_seed, StreamDomain::kSynth, 0);
  TensorContainer c;
  std::vector<float> buf;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const std::size_t in = layer_sizes[i];
    const std::size_t out = layer_sizes[i + 1];
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(in));
    buf.resize(out * in);
    for (auto& w : buf) w = static_cast<float>(std_dev * stream.normal());
    c.add_tensor("layer" + std::to_string(i) + ".weight", {out, in}, buf);
    buf.resize(out);
    for (auto& b : buf) b = static_cast<float>(std_dev * stream.normal());
    c.add_tensor("layer" + std::to_string(i) + ".bias", {out}, buf);
  }
  return c;
}

}  // namespace tattooed
