#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "support.hpp"
#include "tattooed/errors.hpp"
#include "tattooed/ldpc.hpp"

using namespace tattooed;
using testing::test_seed;

namespace {

using Dense = std::vector<std::vector<std::uint8_t>>;

Dense to_dense(const BitMatrix& m) {
  Dense d(m.rows(), std::vector<std::uint8_t>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) d[r][c] = m.get(r, c);
  }
  return d;
}

// Plain Gaussian elimination over GF(2), one byte per entry.
std::size_t gf2_rank(Dense m) {
  std::size_t rank = 0;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.size() && !m[pivot][c]) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r != rank && m[r][c]) {
        for (std::size_t j = 0; j < cols; ++j) m[r][j] ^= m[rank][j];
      }
    }
    ++rank;
  }
  return rank;
}

BitVector random_message(KeyedStream& s, std::size_t k) {
  BitVector m(k);
  for (auto& b : m) b = static_cast<std::uint8_t>(s.uniform_below(2));
  return m;
}

SoftWord bpsk(const BitVector& word, double sigma, KeyedStream& noise) {
  SoftWord soft;
  soft.values.resize(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    soft.values[i] = (word[i] ? -1.0 : 1.0) + sigma * noise.normal();
  }
  soft.snr_db = -20.0 * std::log10(sigma);
  return soft;
}

struct BerCount {
  std::size_t bits = 0, coded_errors = 0, hard_errors = 0;
};

BerCount measure_ber(const LdpcCode& code, double sigma, std::size_t min_bits, std::uint64_t seed) {
  KeyedStream msg(test_seed("ber-msg", seed), StreamDomain::kSynth, 0);
  KeyedStream noise(test_seed("ber-noise", seed), StreamDomain::kSynth, 0);
  BerCount n;
  while (n.bits < min_bits) {
    const BitVector m = random_message(msg, code.k());
    const SoftWord soft = bpsk(ldpc_encode(code, m), sigma, noise);
    const DecodeResult d = ldpc_decode(code, soft);
    for (std::size_t i = 0; i < code.k(); ++i) {
      n.coded_errors += d.message[i] != m[i];
      n.hard_errors += (soft.values[i] < 0.0) != (m[i] == 1);
    }
    n.bits += code.k();
  }
  return n;
}

}  // namespace

TEST_CASE("code structure for k = 76") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 0), 76);
  CHECK(code.n() == 152);
  CHECK(code.k() == 76);
  CHECK(code.checks() == 76);
  const Dense h = to_dense(code.parity_check_dense());
  REQUIRE(h.size() == 76);
  for (const auto& row : h) {
    CHECK(std::count(row.begin(), row.end(), 1) == 6);
  }
  for (std::size_t c = 0; c < 152; ++c) {
    int weight = 0;
    for (const auto& row : h) weight += row[c];
    CHECK(weight == 3);
  }
  for (std::size_t c = 0; c < code.n(); ++c) {
    const auto& rows = code.column_checks()[c];
    CHECK(std::is_sorted(rows.begin(), rows.end()));
    for (auto r : rows) CHECK(h[r][c] == 1);
  }
}

TEST_CASE("construction is deterministic per seed") {
  const LdpcCode a = build_ldpc_code(test_seed("ldpc", 1), 152);
  const LdpcCode b = build_ldpc_code(test_seed("ldpc", 1), 152);
  const LdpcCode c = build_ldpc_code(test_seed("ldpc", 2), 152);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("generator is orthogonal to H and both have full rank") {
  for (std::size_t k : {8, 16, 76, 128, 152}) {
    CAPTURE(k);
    const LdpcCode code = build_ldpc_code(test_seed("ldpc-rank", k), k);
    const Dense g = to_dense(code.generator());
    const Dense h = to_dense(code.parity_check_dense());
    REQUIRE(g.size() == k);
    REQUIRE(g[0].size() == 2 * k);
    bool orthogonal = true;
    for (const auto& gr : g) {
      for (const auto& hr : h) {
        std::uint8_t dot = 0;
        for (std::size_t c = 0; c < 2 * k; ++c) dot ^= gr[c] & hr[c];
        orthogonal = orthogonal && dot == 0;
      }
    }
    CHECK(orthogonal);
    CHECK(gf2_rank(h) == k);
    CHECK(gf2_rank(g) == k);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) CHECK(g[r][c] == (r == c));
    }
  }
}

TEST_CASE("four-cycles are rare") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 3), 152);
  CHECK(code.four_cycles() <= 2);
}

TEST_CASE("encoding is systematic and linear") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 4), 152);
  KeyedStream s(test_seed("msg", 0), StreamDomain::kSynth, 0);
  for (int t = 0; t < 50; ++t) {
    const BitVector a = random_message(s, 152), b = random_message(s, 152);
    const BitVector ca = ldpc_encode(code, a), cb = ldpc_encode(code, b);
    CHECK(std::equal(a.begin(), a.end(), ca.begin()));
    CHECK(satisfies_parity(code, ca));
    BitVector sum(152), csum(304);
    for (std::size_t i = 0; i < 152; ++i) sum[i] = a[i] ^ b[i];
    for (std::size_t i = 0; i < 304; ++i) csum[i] = ca[i] ^ cb[i];
    CHECK(ldpc_encode(code, sum) == csum);
  }
  CHECK(ldpc_encode(code, BitVector(152, 0)) == BitVector(304, 0));
}

TEST_CASE("a flipped codeword bit breaks parity") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 5), 76);
  KeyedStream s(test_seed("msg", 1), StreamDomain::kSynth, 0);
  BitVector c = ldpc_encode(code, random_message(s, 76));
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] ^= 1;
    CHECK_FALSE(satisfies_parity(code, c));
    c[i] ^= 1;
  }
}

TEST_CASE("construction and encoding errors") {
  CHECK_THROWS_AS(build_ldpc_code(test_seed("ldpc", 0), 0), CodeConstructionError);
  CHECK_THROWS_AS(build_ldpc_code(test_seed("ldpc", 0), 7), CodeConstructionError);
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 0), 16);
  CHECK_THROWS_AS(ldpc_encode(code, BitVector(15)), EncodeError);
  CHECK_THROWS_AS(ldpc_encode(code, BitVector(17)), EncodeError);
  SoftWord wrong;
  wrong.values.assign(31, 1.0);
  wrong.snr_db = 10.0;
  CHECK_THROWS_AS(ldpc_decode(code, wrong), EncodeError);
}

TEST_CASE("noiseless decoding is exact") {
  for (std::size_t k : {76, 152, 512}) {
    CAPTURE(k);
    const LdpcCode code = build_ldpc_code(test_seed("ldpc-clean", k), k);
    KeyedStream s(test_seed("clean-msg", k), StreamDomain::kSynth, 0);
    int exact = 0;
    for (int t = 0; t < 100; ++t) {
      const BitVector m = random_message(s, k);
      const BitVector c = ldpc_encode(code, m);
      SoftWord soft;
      for (auto b : c) soft.values.push_back(b ? -1.0 : 1.0);
      soft.snr_db = kMaxSnrDb;
      const DecodeResult d = ldpc_decode(code, soft);
      exact += d.message == m && d.converged && d.iterations == 0;
    }
    CHECK(exact == 100);
  }
}

TEST_CASE("decoder corrects a few hard errors") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 6), 152);
  KeyedStream s(test_seed("msg", 2), StreamDomain::kSynth, 0);
  const BitVector m = random_message(s, 152);
  const BitVector c = ldpc_encode(code, m);
  SoftWord soft;
  for (auto b : c) soft.values.push_back(b ? -1.0 : 1.0);
  for (std::size_t i : {3u, 90u, 200u}) soft.values[i] = -0.3 * soft.values[i];
  soft.snr_db = 3.0;
  const DecodeResult d = ldpc_decode(code, soft);
  CHECK(d.converged);
  CHECK(d.iterations > 0);
  CHECK(d.message == m);
}

TEST_CASE("decoding is deterministic") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 7), 152);
  KeyedStream s(test_seed("msg", 3), StreamDomain::kSynth, 0);
  KeyedStream noise(test_seed("noise", 3), StreamDomain::kSynth, 0);
  const SoftWord soft = bpsk(ldpc_encode(code, random_message(s, 152)), 0.9, noise);
  const DecodeResult a = ldpc_decode(code, soft), b = ldpc_decode(code, soft);
  CHECK(a.message == b.message);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("frame success at sigma 0.5") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 8), 152);
  KeyedStream s(test_seed("frame-msg", 0), StreamDomain::kSynth, 0);
  KeyedStream noise(test_seed("frame-noise", 0), StreamDomain::kSynth, 0);
  int exact = 0;
  for (int t = 0; t < 200; ++t) {
    const BitVector m = random_message(s, 152);
    exact += ldpc_decode(code, bpsk(ldpc_encode(code, m), 0.5, noise)).message == m;
  }
  CHECK(exact >= 190);
}

TEST_CASE("coding gain over hard decisions") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 9), 152);
  for (double sigma : {0.4, 0.5, 0.55, 0.7}) {
    CAPTURE(sigma);
    const BerCount n = measure_ber(code, sigma, 10000, static_cast<std::uint64_t>(sigma * 100));
    const double hard = static_cast<double>(n.hard_errors) / n.bits;
    const double coded = static_cast<double>(n.coded_errors) / n.bits;
    // Hard-decision BER should match Q(1/sigma).
    const double q = testing::normal_cdf(-1.0 / sigma);
    const double sd = std::sqrt(q * (1 - q) / n.bits);
    CHECK(std::abs(hard - q) < 5 * sd);
    CHECK(coded < hard);
  }
}

TEST_CASE("parity adjacency dump") {
  const LdpcCode code = build_ldpc_code(test_seed("ldpc", 10), 8);
  std::ostringstream os;
  write_parity_adjacency(code, os);
  std::istringstream in(os.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::size_t r = 0;
    char colon = 0;
    ls >> r >> colon;
    CHECK(r == rows);
    CHECK(colon == ':');
    std::vector<std::uint32_t> cols;
    std::uint32_t c = 0;
    while (ls >> c) cols.push_back(c);
    CHECK(cols == code.row_columns()[r]);
    ++rows;
  }
  CHECK(rows == code.checks());
}
