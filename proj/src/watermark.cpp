#include "tattooed/watermark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "tattooed/errors.hpp"

namespace tattooed {
namespace {

constexpr std::size_t kCodeCacheCapacity = 8;

SignVector to_signs(std::span<const std::uint8_t> bits) {
  SignVector s(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? -1 : 1;
  return s;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

WatermarkPayload WatermarkPayload::from_text(std::string_view text) {
  return {std::vector<std::uint8_t>(text.begin(), text.end())};
}

BitVector WatermarkPayload::bits() const { return bytes_to_bits(bytes); }

BitVector bytes_to_bits(std::span<const std::uint8_t> bytes) {
  BitVector bits(bytes.size() * 8);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1U;
  }
  return bits;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
  }
  return bytes;
}

std::size_t spread_bit_count(std::size_t payload_bits) {
  return kPreambleLength + 2 * payload_bits;
}

std::shared_ptr<const LdpcCode> cached_ldpc_code(const Seed& ldpc_seed, std::size_t k) {
  static std::mutex mu;
  static std::map<std::pair<Seed, std::size_t>, std::shared_ptr<const LdpcCode>> cache;
  const auto key = std::make_pair(ldpc_seed, k);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto code = std::make_shared<const LdpcCode>(build_ldpc_code(ldpc_seed, k));
  std::lock_guard lock(mu);
  if (cache.size() >= kCodeCacheCapacity) cache.erase(cache.begin());
  cache.emplace(key, code);
  return code;
}

MarkResult mark(const ParameterVector& weights, const SecretKey& key,
                const WatermarkPayload& payload, double gamma, double ratio) {
  if (!(gamma > 0.0)) throw EmbedError("gamma must be positive");
  if (payload.bytes.empty()) throw EncodeError("payload must hold at least one byte");

  const DerivedSeeds seeds = derive_seeds(key);
  const std::size_t total_bits = spread_bit_count(payload.bit_length());
  IndexSet indices = select_parameters(seeds.select, weights.size(), ratio);
  if (indices.size() < kMinProcessingGain * total_bits) {
    throw CapacityError("payload needs " + std::to_string(kMinProcessingGain * total_bits) +
                        " selected parameters, only " + std::to_string(indices.size()) +
                        " available");
  }

  const auto code = cached_ldpc_code(seeds.ldpc, payload.bit_length());
  const BitVector codeword = ldpc_encode(*code, payload.bits());

  EmbedJob job;
  job.bits = generate_preamble(seeds.code);
  const SignVector coded = to_signs(codeword);
  job.bits.insert(job.bits.end(), coded.begin(), coded.end());
  job.gamma = gamma;
  job.indices = std::move(indices);
  job.code_seed = seeds.code;

  MarkResult result;
  result.marked = embed(weights, job);
  auto& rec = result.record;
  rec.key_id = key.id();
  rec.baseline.sha256 = content_hash(weights.values);
  rec.payload = payload;
  rec.gamma = gamma;
  rec.ratio = ratio;
  rec.spread_bits = total_bits;
  rec.parameter_count = weights.size();
  rec.created_at = utc_now();
  return result;
}

double watermark_accuracy(std::span<const std::uint8_t> extracted,
                          std::span<const std::uint8_t> original) {
  if (extracted.size() != original.size()) {
    throw AccuracyError("extracted and original bit strings differ in length");
  }
  if (original.empty()) throw AccuracyError("cannot score an empty bit string");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    matches += (extracted[i] & 1U) == (original[i] & 1U);
  }
  return static_cast<double>(matches) / static_cast<double>(original.size());
}

VerifyReport verify(const ParameterVector& weights, const MarkRecord& record,
                    const SecretKey& key, const ParameterVector& baseline,
                    double threshold) {
  if (content_hash(baseline.values) != record.baseline.sha256) {
    throw BaselineMismatchError("baseline weights do not match the record's baseline hash");
  }
  if (weights.size() != baseline.size() || weights.size() != record.parameter_count) {
    throw ExtractError("model has " + std::to_string(weights.size()) +
                       " parameters, record expects " +
                       std::to_string(record.parameter_count));
  }
  const std::size_t k = record.payload.bit_length();
  if (record.spread_bits != spread_bit_count(k)) {
    throw RecordError("record spread bit count disagrees with its payload length");
  }

  const DerivedSeeds seeds = derive_seeds(key);
  const IndexSet indices = select_parameters(seeds.select, weights.size(), record.ratio);
  const std::vector<double> y =
      extract(weights, baseline, indices, seeds.code, record.spread_bits);
  const SignVector preamble = generate_preamble(seeds.code);
  const BitVector expected = record.payload.bits();
  const auto coded = std::span(y).subspan(kPreambleLength);

  VerifyReport report;
  try {
    report.estimate = estimate_channel(std::span(y).first(kPreambleLength), preamble);
  } catch (const ChannelLostError&) {
    report.channel_lost = true;
    BitVector hard(k);
    for (std::size_t i = 0; i < k; ++i) hard[i] = coded[i] < 0.0 ? 1 : 0;
    report.watermark_accuracy = watermark_accuracy(hard, expected);
    report.extracted_payload = bits_to_bytes(hard);
    report.decision = 0;
    return report;
  }

  const auto code = cached_ldpc_code(seeds.ldpc, k);
  SoftWord soft;
  soft.values.resize(coded.size());
  for (std::size_t i = 0; i < coded.size(); ++i) soft.values[i] = coded[i] / report.estimate.gain;
  soft.snr_db = report.estimate.snr_db;
  const DecodeResult decoded = ldpc_decode(*code, soft);

  report.decoder_iterations = decoded.iterations;
  report.decoder_converged = decoded.converged;
  report.watermark_accuracy = watermark_accuracy(decoded.message, expected);
  report.extracted_payload = bits_to_bytes(decoded.message);
  report.decision = decide(report.watermark_accuracy, threshold);
  return report;
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (double decade : {1e4, 1e3, 1e2}) {
    for (int m = 1; m <= 9; ++m) grid.push_back(m / decade);
  }
  return grid;
}

std::vector<GammaSweepRow> gamma_sweep(const ParameterVector& weights, const SecretKey& key,
                                       const WatermarkPayload& payload,
                                       std::span<const double> grid, double ratio) {
  if (grid.empty()) throw EmbedError("gamma grid is empty");
  double base_norm = 0.0;
  for (float w : weights.values) base_norm += static_cast<double>(w) * w;
  base_norm = std::sqrt(base_norm);

  std::vector<GammaSweepRow> rows;
  for (double gamma : grid) {
    const MarkResult m = mark(weights, key, payload, gamma, ratio);
    const VerifyReport rep = verify(m.marked, m.record, key, weights);
    double diff = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double d = static_cast<double>(m.marked.values[i]) - weights.values[i];
      diff += d * d;
    }
    rows.push_back({gamma, rep.watermark_accuracy,
                    base_norm > 0.0 ? std::sqrt(diff) / base_norm : 0.0});
  }
  return rows;
}

}  // namespace tattooed
