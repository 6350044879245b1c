#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace tattooed {

using Seed = std::array<std::uint8_t, 32>;

/// Role tags mixed into the stream nonce, so one seed never feeds two
/// consumers from the same keystream.
enum class StreamDomain : std::uint32_t {
  kSpreadingCode = 0,
  kPreamble = 1,
  kSelection = 2,
  kLdpcConstruction = 3,
  kPrune = 4,
  kPerturb = 5,
  kShuffle = 6,
  kSynth = 7,
};

/// Counter-based keystream: ChaCha20 (IETF variant) keyed by a 32-byte seed,
/// nonce = little-endian u64 stream index || little-endian u32 domain.
/// Block b of stream (seed, domain, index) is a pure function of those
/// four values, which makes random access and parallel generation trivial.
void keystream_blocks(const Seed& seed, StreamDomain domain,
                      std::uint64_t index, std::uint32_t first_block,
                      std::span<std::uint8_t> out);

/// Sequential reader over one keystream with the usual derived draws.
class KeyedStream {
 public:
  KeyedStream(const Seed& seed, StreamDomain domain, std::uint64_t index);

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();

  /// Uniform integer in [0, bound); bound must be nonzero. Unbiased.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller; both outputs of each pair are used.
  double normal();

 private:
  void refill();

  Seed seed_;
  StreamDomain domain_;
  std::uint64_t index_;
  std::uint32_t next_block_ = 0;
  std::array<std::uint8_t, 1024> buffer_{};
  std::size_t pos_ = buffer_.size();
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// SHA-256 over the concatenation of the given byte spans.
Seed sha256(std::span<const std::uint8_t> a,
            std::span<const std::uint8_t> b = {});

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Decodes lowercase or uppercase hex; returns false on bad input.
bool from_hex(std::string_view hex, std::span<std::uint8_t> out);

/// Seed for attack and synthesis streams, built from a user-facing integer.
Seed seed_from_integer(std::string_view label, std::uint64_t value);

}  // namespace tattooed
