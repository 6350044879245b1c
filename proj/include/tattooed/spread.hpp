#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tattooed/keying.hpp"
#include "tattooed/model_io.hpp"

namespace tattooed {

/// Supplies packed chips for spread bit `bit_index`, starting at 64-byte
/// block `first_block` of that bit's code (512 chips per block). Chip r of a
/// block is bit (r mod 8) of byte r/8; a set bit is +1.
using ChipSource = std::function<void(std::uint64_t bit_index, std::uint32_t first_block,
                                      std::span<std::uint8_t> out)>;

/// The keyed spreading codes of `code_seed`.
ChipSource keyed_chips(const Seed& code_seed);

struct EmbedJob {
  SignVector bits;     // preamble followed by the codeword, values +-1
  double gamma = 0.0;  // signal strength
  IndexSet indices;    // selected parameter positions, code chip r -> indices[r]
  Seed code_seed{};
};

struct ChannelEstimate {
  double gain = 0.0;
  double sigma = 0.0;
  double snr_db = 0.0;
};

inline constexpr double kSigmaFloor = 1e-3;

/// Adds gamma * sum_i c_i[r] * b_i to weights[indices[r]]. The chip sum is
/// formed exactly in integers and added to each weight once, so the result
/// is independent of bit order. Throws EmbedError on bad or empty indices,
/// gamma <= 0 or empty bits.
ParameterVector embed(const ParameterVector& weights, const EmbedJob& job);
ParameterVector embed(const ParameterVector& weights, const EmbedJob& job,
                      const ChipSource& chips);

/// y_i = c_i . (marked - baseline) over the selected indices, for
/// i in [0, total_bits). Throws ExtractError on length or index problems.
std::vector<double> extract(const ParameterVector& marked, const ParameterVector& baseline,
                            const IndexSet& indices, const Seed& code_seed,
                            std::size_t total_bits);
std::vector<double> extract(const ParameterVector& marked, const ParameterVector& baseline,
                            const IndexSet& indices, const ChipSource& chips,
                            std::size_t total_bits);

/// gain = mean(y.p); sigma = population std of (y.p / gain);
/// snr_db = -20 log10(max(sigma, 1e-3)). Throws ChannelLostError when the
/// gain is not positive.
ChannelEstimate estimate_channel(std::span<const double> y_preamble,
                                 std::span<const std::int8_t> preamble);

}  // namespace tattooed
