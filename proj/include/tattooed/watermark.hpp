#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tattooed/keying.hpp"
#include "tattooed/ldpc.hpp"
#include "tattooed/model_io.hpp"
#include "tattooed/spread.hpp"

namespace tattooed {

inline constexpr double kDefaultThreshold = 0.9;
inline constexpr std::size_t kMinProcessingGain = 25;
inline constexpr double kReferenceGamma = 9e-2;
inline constexpr std::string_view kTextWatermark = "TATTOOED watermark!";

/// Opaque octet string; bits are read most-significant-bit first.
struct WatermarkPayload {
  std::vector<std::uint8_t> bytes;

  static WatermarkPayload from_text(std::string_view text);
  std::size_t bit_length() const { return 8 * bytes.size(); }
  BitVector bits() const;
};

BitVector bytes_to_bits(std::span<const std::uint8_t> bytes);
/// Packs MSB-first; a trailing partial byte is zero padded.
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

/// Total spread bits for a payload: preamble plus the rate-1/2 codeword.
std::size_t spread_bit_count(std::size_t payload_bits);

struct BaselineRef {
  std::string path;
  std::string sha256;  // content_hash of the baseline weights
};

/// What the owner keeps to run verify later. Serialised as `.wmrec` JSON.
struct MarkRecord {
  std::string key_id;
  BaselineRef baseline;
  WatermarkPayload payload;
  double gamma = 0.0;
  double ratio = 1.0;
  std::size_t spread_bits = 0;
  std::size_t parameter_count = 0;
  std::string created_at;
};

std::string record_to_json(const MarkRecord& record);
/// Throws RecordError on malformed or inconsistent documents.
MarkRecord record_from_json(std::string_view text);
void save_record(const MarkRecord& record, const std::filesystem::path& path);
MarkRecord load_record(const std::filesystem::path& path);

struct MarkResult {
  ParameterVector marked;
  MarkRecord record;
};

/// Preamble followed by the LDPC codeword of the payload, spread over the
/// key-selected parameters. Throws CapacityError when fewer than 25 * P
/// parameters are selected, EmbedError for gamma <= 0, EncodeError for an
/// empty payload.
MarkResult mark(const ParameterVector& weights, const SecretKey& key,
                const WatermarkPayload& payload, double gamma, double ratio);

struct VerifyReport {
  int decision = 0;
  double watermark_accuracy = 0.0;
  bool channel_lost = false;
  ChannelEstimate estimate;  // meaningful only when !channel_lost
  std::vector<std::uint8_t> extracted_payload;
  int decoder_iterations = 0;
  bool decoder_converged = false;
};

/// Throws BaselineMismatchError when `baseline` does not hash to the
/// record's baseline reference. A lost channel yields decision 0 with the
/// raw hard-decision match rate as accuracy.
VerifyReport verify(const ParameterVector& weights, const MarkRecord& record,
                    const SecretKey& key, const ParameterVector& baseline,
                    double threshold = kDefaultThreshold);

/// matches / length. Throws AccuracyError on empty or unequal inputs.
double watermark_accuracy(std::span<const std::uint8_t> extracted,
                          std::span<const std::uint8_t> original);

inline int decide(double accuracy, double threshold = kDefaultThreshold) {
  return accuracy >= threshold ? 1 : 0;
}

struct GammaSweepRow {
  double gamma = 0.0;
  double watermark_accuracy = 0.0;
  double distortion = 0.0;  // ||marked - W|| / ||W||
};

/// 1e-4..9e-4, 1e-3..9e-3, 1e-2..9e-2 in unit steps of each decade.
std::vector<double> default_gamma_grid();

std::vector<GammaSweepRow> gamma_sweep(const ParameterVector& weights, const SecretKey& key,
                                       const WatermarkPayload& payload,
                                       std::span<const double> grid, double ratio = 1.0);

/// Process-wide cache of built codes keyed by (seed, k).
std::shared_ptr<const LdpcCode> cached_ldpc_code(const Seed& ldpc_seed, std::size_t k);

}  // namespace tattooed
