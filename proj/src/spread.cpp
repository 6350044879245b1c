#include "tattooed/spread.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "tattooed/errors.hpp"

namespace tattooed {
namespace {

// Codes are processed in tiles of kTileChips consecutive selected
// parameters. A tile is a whole number of keystream blocks, so every tile
// of every code can be generated independently.
constexpr std::size_t kChipsPerBlock = 512;
constexpr std::size_t kTileChips = 2048;
constexpr std::size_t kTileBytes = kTileChips / 8;
constexpr std::size_t kTileGroups = kTileChips / 8;

// Byte value -> eight byte lanes holding its bits, for SWAR chip counting.
constexpr std::array<std::uint64_t, 256> make_lane_table() {
  std::array<std::uint64_t, 256> t{};
  for (std::size_t v = 0; v < 256; ++v) {
    std::uint64_t lanes = 0;
    for (int j = 0; j < 8; ++j) {
      if ((v >> j) & 1U) lanes |= std::uint64_t{1} << (8 * j);
    }
    t[v] = lanes;
  }
  return t;
}
constexpr auto kLaneTable = make_lane_table();

void check_indices(const IndexSet& indices, std::size_t size, bool for_embed) {
  for (auto i : indices) {
    if (i >= size) {
      const std::string msg = "parameter index " + std::to_string(i) +
                              " out of range for " + std::to_string(size) + " weights";
      if (for_embed) throw EmbedError(msg);
      throw ExtractError(msg);
    }
  }
}

}  // namespace

ChipSource keyed_chips(const Seed& code_seed) {
  return [code_seed](std::uint64_t bit, std::uint32_t first_block,
                     std::span<std::uint8_t> out) {
    spreading_code_packed(code_seed, bit, out, first_block);
  };
}

ParameterVector embed(const ParameterVector& weights, const EmbedJob& job) {
  return embed(weights, job, keyed_chips(job.code_seed));
}

ParameterVector embed(const ParameterVector& weights, const EmbedJob& job,
                      const ChipSource& chips) {
  if (!(job.gamma > 0.0) || !std::isfinite(job.gamma)) {
    throw EmbedError("gamma must be a positive finite value");
  }
  if (job.bits.empty()) throw EmbedError("nothing to embed");
  if (job.indices.empty()) throw EmbedError("no parameters selected to carry the code");
  check_indices(job.indices, weights.size(), true);

  ParameterVector out = weights;
  const std::size_t total_bits = job.bits.size();
  const std::size_t R = job.indices.size();

  std::array<std::uint8_t, kTileBytes> packed{};
  std::array<std::uint64_t, kTileGroups> lanes{};
  std::array<std::uint32_t, kTileChips> counts{};

  for (std::size_t tile = 0; tile * kTileChips < R; ++tile) {
    const std::size_t begin = tile * kTileChips;
    const std::size_t len = std::min(kTileChips, R - begin);
    const std::size_t groups = (len + 7) / 8;
    const auto first_block = static_cast<std::uint32_t>(begin / kChipsPerBlock);
    counts.fill(0);
    lanes.fill(0);

    // count_r = #{i : chip_i[r] * b_i == +1}; byte lanes saturate at 255.
    std::size_t pending = 0;
    for (std::size_t i = 0; i < total_bits; ++i) {
      chips(i, first_block, std::span(packed).first(groups));
      const std::uint8_t flip = job.bits[i] < 0 ? 0xFF : 0x00;
      for (std::size_t g = 0; g < groups; ++g) lanes[g] += kLaneTable[packed[g] ^ flip];
      if (++pending == 255 || i + 1 == total_bits) {
        for (std::size_t g = 0; g < groups; ++g) {
          for (int j = 0; j < 8; ++j) counts[8 * g + j] += (lanes[g] >> (8 * j)) & 0xFF;
          lanes[g] = 0;
        }
        pending = 0;
      }
    }

    for (std::size_t r = 0; r < len; ++r) {
      const auto chip_sum = 2 * static_cast<std::int64_t>(counts[r]) -
                            static_cast<std::int64_t>(total_bits);
      float& w = out.values[job.indices[begin + r]];
      w = static_cast<float>(static_cast<double>(w) +
                             job.gamma * static_cast<double>(chip_sum));
    }
  }
  out.provenance = content_hash(out.values);
  return out;
}

std::vector<double> extract(const ParameterVector& marked, const ParameterVector& baseline,
                            const IndexSet& indices, const Seed& code_seed,
                            std::size_t total_bits) {
  return extract(marked, baseline, indices, keyed_chips(code_seed), total_bits);
}

std::vector<double> extract(const ParameterVector& marked, const ParameterVector& baseline,
                            const IndexSet& indices, const ChipSource& chips,
                            std::size_t total_bits) {
  if (marked.size() != baseline.size()) {
    throw ExtractError("marked model has " + std::to_string(marked.size()) +
                       " parameters, baseline has " + std::to_string(baseline.size()));
  }
  if (indices.empty()) throw ExtractError("no parameters selected to correlate against");
  check_indices(indices, marked.size(), false);

  std::vector<double> y(total_bits, 0.0);
  const std::size_t R = indices.size();

  // Per group of eight chips, table[byte] = sum_j sign_j * d_j, so each
  // byte of code costs one lookup.
  std::vector<double> table(kTileGroups * 256);
  std::array<double, kTileChips> diff{};
  std::array<std::uint8_t, kTileBytes> packed{};

  for (std::size_t tile = 0; tile * kTileChips < R; ++tile) {
    const std::size_t begin = tile * kTileChips;
    const std::size_t len = std::min(kTileChips, R - begin);
    const std::size_t groups = (len + 7) / 8;
    const auto first_block = static_cast<std::uint32_t>(begin / kChipsPerBlock);

    diff.fill(0.0);
    for (std::size_t r = 0; r < len; ++r) {
      const std::size_t p = indices[begin + r];
      diff[r] = static_cast<double>(marked.values[p]) - static_cast<double>(baseline.values[p]);
    }
    for (std::size_t g = 0; g < groups; ++g) {
      double* t = table.data() + 256 * g;
      const double* d = diff.data() + 8 * g;
      t[0] = -(((d[0] + d[1]) + (d[2] + d[3])) + ((d[4] + d[5]) + (d[6] + d[7])));
      for (unsigned v = 1; v < 256; ++v) {
        const unsigned low = static_cast<unsigned>(std::countr_zero(v));
        t[v] = t[v & (v - 1)] + 2.0 * d[low];
      }
    }

    for (std::size_t i = 0; i < total_bits; ++i) {
      chips(i, first_block, std::span(packed).first(groups));
      double acc = 0.0;
      for (std::size_t g = 0; g < groups; ++g) acc += table[256 * g + packed[g]];
      y[i] += acc;
    }
  }
  return y;
}

ChannelEstimate estimate_channel(std::span<const double> y_preamble,
                                 std::span<const std::int8_t> preamble) {
  if (y_preamble.size() != preamble.size() || preamble.empty()) {
    throw ExtractError("preamble correlations and preamble differ in length");
  }
  const auto count = static_cast<double>(preamble.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < preamble.size(); ++i) sum += y_preamble[i] * preamble[i];
  const double gain = sum / count;
  if (!(gain > 0.0) || !std::isfinite(gain)) {
    throw ChannelLostError("preamble gain is not positive; watermark absent or wrong key");
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < preamble.size(); ++i) mean += y_preamble[i] * preamble[i] / gain;
  mean /= count;
  double var = 0.0;
  for (std::size_t i = 0; i < preamble.size(); ++i) {
    const double z = y_preamble[i] * preamble[i] / gain - mean;
    var += z * z;
  }
  ChannelEstimate est;
  est.gain = gain;
  est.sigma = std::sqrt(var / count);
  est.snr_db = -20.0 * std::log10(std::max(est.sigma, kSigmaFloor));
  return est;
}

}  // namespace tattooed
