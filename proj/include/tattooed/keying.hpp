#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tattooed/keyed_stream.hpp"

namespace tattooed {

using SignVector = std::vector<std::int8_t>;
using IndexSet = std::vector<std::size_t>;

inline constexpr std::size_t kPreambleLength = 200;

/// The owner's 512-bit secret. Only ever serialised by save_key_file.
class SecretKey {
 public:
  static constexpr std::size_t kBytes = 64;

  /// Throws KeyFormatError unless `bytes` is exactly 64 bytes long.
  static SecretKey from_bytes(std::span<const std::uint8_t> bytes);
  static SecretKey generate();

  std::span<const std::uint8_t, kBytes> bytes() const { return bytes_; }

  /// SHA-256 of the raw key, hex encoded. Safe to publish.
  std::string id() const;

  friend bool operator==(const SecretKey&, const SecretKey&) = default;

 private:
  explicit SecretKey(const std::array<std::uint8_t, kBytes>& b) : bytes_(b) {}
  std::array<std::uint8_t, kBytes> bytes_{};
};

/// Loads 64 raw bytes, or 128 hex characters (surrounding whitespace ignored).
SecretKey load_key_file(const std::filesystem::path& path);
/// Writes the key as 128 lowercase hex characters and a newline.
void save_key_file(const SecretKey& key, const std::filesystem::path& path);

struct DerivedSeeds {
  Seed code{};
  Seed ldpc{};
  Seed select{};
};

/// seed = SHA-256(key || label) for the labels "code", "ldpc", "select".
DerivedSeeds derive_seeds(const SecretKey& key);
DerivedSeeds derive_seeds(std::span<const std::uint8_t> key_bytes);

/// Spreading code for one spread bit: `length` chips in {-1, +1}.
/// Chip r is bit (r mod 8) of keystream byte r/8 of stream
/// (code_seed, kSpreadingCode, bit_index); a set bit is +1.
SignVector spreading_code(const Seed& code_seed, std::uint64_t bit_index,
                          std::size_t length);

/// Raw packed chips (ceil(length/8) bytes) for the same stream.
void spreading_code_packed(const Seed& code_seed, std::uint64_t bit_index,
                           std::span<std::uint8_t> out,
                           std::uint32_t first_block = 0);

/// The 200 known preamble signs, drawn from the code seed's preamble stream.
SignVector generate_preamble(const Seed& code_seed);

/// floor(ratio * total) distinct indices in ascending order, chosen by a
/// seeded partial Fisher-Yates shuffle of [0, total).
IndexSet select_parameters(const Seed& select_seed, std::size_t total_params,
                           double ratio);

/// The first `count` entries of a seeded Fisher-Yates shuffle of [0, total),
/// in draw order. Shared by parameter selection and random pruning.
IndexSet seeded_prefix(const Seed& seed, StreamDomain domain,
                       std::size_t total, std::size_t count);

}  // namespace tattooed
