#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tattooed/keyed_stream.hpp"

namespace tattooed {

using BitVector = std::vector<std::uint8_t>;  // one 0/1 value per entry

/// Dense GF(2) matrix, rows packed into 64-bit words.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return words_; }

  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * words_ + (c >> 6)] >> (c & 63)) & 1U;
  }
  void set(std::size_t r, std::size_t c, bool v) {
    auto& w = data_[r * words_ + (c >> 6)];
    const std::uint64_t bit = std::uint64_t{1} << (c & 63);
    w = v ? (w | bit) : (w & ~bit);
  }
  std::span<std::uint64_t> row(std::size_t r) {
    return {data_.data() + r * words_, words_};
  }
  std::span<const std::uint64_t> row(std::size_t r) const {
    return {data_.data() + r * words_, words_};
  }
  void xor_row_into(std::size_t src, std::size_t dst);
  void swap_rows(std::size_t a, std::size_t b);

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> data_;
};

/// Rate-1/2 LDPC code with column weight 3 and row weight 6. Columns are
/// ordered so the first k codeword positions carry the message.
class LdpcCode {
 public:
  static constexpr std::size_t kColumnWeight = 3;

  std::size_t n() const { return column_checks_.size(); }
  std::size_t k() const { return n() / 2; }
  std::size_t checks() const { return row_columns_.size(); }
  const Seed& seed() const { return seed_; }

  /// Rows of H touching each column (exactly three, ascending).
  const std::vector<std::array<std::uint32_t, kColumnWeight>>& column_checks() const {
    return column_checks_;
  }
  /// Columns of H in each row, ascending.
  const std::vector<std::vector<std::uint32_t>>& row_columns() const {
    return row_columns_;
  }
  /// Systematic generator, k x n, equal to [I | P^T].
  const BitMatrix& generator() const { return generator_; }

  /// Dense copy of H, (n-k) x n.
  BitMatrix parity_check_dense() const;

  /// Number of length-4 cycles left in the Tanner graph.
  std::size_t four_cycles() const;

  friend bool operator==(const LdpcCode&, const LdpcCode&) = default;

 private:
  friend LdpcCode build_ldpc_code(const Seed& ldpc_seed, std::size_t k);

  Seed seed_{};
  std::vector<std::array<std::uint32_t, kColumnWeight>> column_checks_;
  std::vector<std::vector<std::uint32_t>> row_columns_;
  BitMatrix generator_;
};

inline constexpr int kConstructionAttempts = 64;
inline constexpr int kMaxDecodeIterations = 50;
inline constexpr double kMaxSnrDb = 60.0;

/// Seeded construction. Throws CodeConstructionError for k < 8 or when no
/// full-rank parity-check matrix turns up within the attempt budget.
LdpcCode build_ldpc_code(const Seed& ldpc_seed, std::size_t k);

/// Systematic encoding; throws EncodeError on a length mismatch.
BitVector ldpc_encode(const LdpcCode& code, std::span<const std::uint8_t> message);

/// H * word^T == 0 over GF(2).
bool satisfies_parity(const LdpcCode& code, std::span<const std::uint8_t> word);

/// Gain-normalised correlator outputs: +1 means a 0 bit, -1 a 1 bit.
struct SoftWord {
  std::vector<double> values;
  double snr_db = 0.0;
};

struct DecodeResult {
  BitVector message;
  int iterations = 0;
  bool converged = false;
};

/// Sum-product belief propagation in the log domain. Channel LLR for
/// position i is 2 * values[i] / sigma^2 with sigma = 10^(-snr_db / 20),
/// snr_db capped at 60. Never throws for non-convergence; returns the hard
/// decision of the last beliefs instead. Throws EncodeError on a length
/// mismatch.
DecodeResult ldpc_decode(const LdpcCode& code, const SoftWord& soft,
                         int max_iterations = kMaxDecodeIterations);

/// Debug dump of H, one line per row: "<row>: <col> <col> ...".
void write_parity_adjacency(const LdpcCode& code, std::ostream& out);

}  // namespace tattooed
