#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tattooed/keyed_stream.hpp"

namespace tattooed {

/// One manifest entry of a `.tnsr` file. Offsets are relative to the blob.
struct TensorEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t byte_length = 0;

  std::size_t elements() const;
  friend bool operator==(const TensorEntry&, const TensorEntry&) = default;
};

using Manifest = std::vector<TensorEntry>;

/// Named f32 tensors stored back to back in manifest order.
///
/// File layout (all integers little-endian):
///   "TNSR0001" | u64 header length | JSON manifest | ' ' padding to a
///   4-byte boundary | f32 blob
/// The header length counts the JSON bytes only. The JSON object holds a
/// single "tensors" array of {name, shape, dtype:"f32", offset, byte_length}.
class TensorContainer {
 public:
  TensorContainer() = default;

  /// Appends a tensor; throws FormatError on a duplicate name or a
  /// shape/size mismatch.
  void add_tensor(std::string name, std::vector<std::size_t> shape,
                  std::span<const float> values);

  const Manifest& manifest() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const { return data_.size(); }

  std::span<const float> tensor(std::size_t i) const;
  std::span<float> tensor(std::size_t i);
  /// Index of the named tensor, or size() when absent.
  std::size_t find(std::string_view name) const;

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  friend bool operator==(const TensorContainer&, const TensorContainer&) = default;

 private:
  friend TensorContainer unflatten(std::span<const float>, const Manifest&);

  Manifest entries_;
  std::vector<float> data_;
};

/// Flattened weights. Position order is manifest order, row-major within a
/// tensor. `provenance` is the content hash of the values.
struct ParameterVector {
  std::vector<float> values;
  std::string provenance;

  std::size_t size() const { return values.size(); }
};

/// Hex SHA-256 over the little-endian f32 bytes.
std::string content_hash(std::span<const float> values);

std::vector<std::uint8_t> serialize(const TensorContainer& container);
TensorContainer deserialize(std::span<const std::uint8_t> bytes);

TensorContainer load_container(const std::filesystem::path& path);
void save_container(const TensorContainer& container, const std::filesystem::path& path);

ParameterVector flatten(const TensorContainer& container);
/// Throws FormatError when the lengths disagree or the manifest is malformed.
TensorContainer unflatten(std::span<const float> values, const Manifest& manifest);
inline TensorContainer unflatten(const ParameterVector& v, const Manifest& manifest) {
  return unflatten(v.values, manifest);
}

/// Dense network with `layer_sizes.front()` inputs. Layer i gets
/// "layer<i>.weight" [out, in] and "layer<i>.bias" [out], all drawn from
/// N(0, 1/fan_in). Throws FormatError for fewer than two sizes or a zero size.
TensorContainer synth_model(std::span<const std::size_t> layer_sizes,
                            const Seed& init_seed);

}  // namespace tattooed
