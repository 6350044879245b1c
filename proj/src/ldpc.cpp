#include "tattooed/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "tattooed/errors.hpp"

namespace tattooed {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * words_, 0) {}

void BitMatrix::xor_row_into(std::size_t src, std::size_t dst) {
  const std::uint64_t* s = data_.data() + src * words_;
  std::uint64_t* d = data_.data() + dst * words_;
  for (std::size_t w = 0; w < words_; ++w) d[w] ^= s[w];
}

void BitMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  std::swap_ranges(data_.begin() + static_cast<std::ptrdiff_t>(a * words_),
                   data_.begin() + static_cast<std::ptrdiff_t>((a + 1) * words_),
                   data_.begin() + static_cast<std::ptrdiff_t>(b * words_));
}

namespace {

constexpr std::size_t kRowWeight = 6;
constexpr int kCycleReductionPasses = 8;
constexpr int kSwapTries = 8;

// Tanner graph under construction. Rows hold six column slots, columns three
// row slots; a swap exchanges the column ends of two edges.
struct Graph {
  std::vector<std::array<std::uint32_t, 3>> col_rows;
  std::vector<std::array<std::uint32_t, kRowWeight>> row_cols;

  bool col_has(std::uint32_t c, std::uint32_t r) const {
    const auto& rs = col_rows[c];
    return rs[0] == r || rs[1] == r || rs[2] == r;
  }
  int col_count(std::uint32_t c, std::uint32_t r) const {
    const auto& rs = col_rows[c];
    return (rs[0] == r) + (rs[1] == r) + (rs[2] == r);
  }

  // 4-cycles through edge (r, c).
  int cycles_at(std::uint32_t r, std::uint32_t c) const {
    int count = 0;
    for (auto c2 : row_cols[r]) {
      if (c2 == c) continue;
      for (auto r2 : col_rows[c2]) {
        if (r2 != r && col_has(c, r2)) ++count;
      }
    }
    return count;
  }

  // Edge e is (row e / 6, row_cols[row][slot]).
  void swap_columns(std::size_t e, std::size_t f) {
    const auto r1 = static_cast<std::uint32_t>(e / kRowWeight);
    const auto r2 = static_cast<std::uint32_t>(f / kRowWeight);
    auto& c1 = row_cols[r1][e % kRowWeight];
    auto& c2 = row_cols[r2][f % kRowWeight];
    *std::find(col_rows[c1].begin(), col_rows[c1].end(), r1) = r2;
    *std::find(col_rows[c2].begin(), col_rows[c2].end(), r2) = r1;
    std::swap(c1, c2);
  }

  std::uint32_t row_of(std::size_t e) const {
    return static_cast<std::uint32_t>(e / kRowWeight);
  }
  std::uint32_t col_of(std::size_t e) const {
    return row_cols[e / kRowWeight][e % kRowWeight];
  }
};

// Socket construction: 3n column sockets shuffled against 6m row sockets.
Graph random_regular_graph(KeyedStream& stream, std::size_t n) {
  const std::size_t m = n / 2;
  std::vector<std::uint32_t> sockets(3 * n);
  for (std::size_t i = 0; i < sockets.size(); ++i) {
    sockets[i] = static_cast<std::uint32_t>(i / 3);
  }
  for (std::size_t i = sockets.size(); i > 1; --i) {
    std::swap(sockets[i - 1], sockets[stream.uniform_below(i)]);
  }
  Graph g;
  g.col_rows.assign(n, {});
  g.row_cols.assign(m, {});
  std::vector<std::uint8_t> fill(n, 0);
  for (std::size_t e = 0; e < sockets.size(); ++e) {
    const auto r = static_cast<std::uint32_t>(e / kRowWeight);
    const auto c = sockets[e];
    g.row_cols[r][e % kRowWeight] = c;
    g.col_rows[c][fill[c]++] = r;
  }
  return g;
}

bool repair_parallel_edges(Graph& g, KeyedStream& stream) {
  const std::size_t edges = g.row_cols.size() * kRowWeight;
  for (std::size_t e = 0; e < edges; ++e) {
    int guard = 0;
    while (g.col_count(g.col_of(e), g.row_of(e)) > 1) {
      if (++guard > 1000) return false;
      const std::size_t f = stream.uniform_below(edges);
      const auto r1 = g.row_of(e), c1 = g.col_of(e);
      const auto r2 = g.row_of(f), c2 = g.col_of(f);
      if (r1 == r2 || c1 == c2) continue;
      if (g.col_has(c2, r1) || g.col_has(c1, r2)) continue;
      g.swap_columns(e, f);
    }
  }
  return true;
}

void reduce_four_cycles(Graph& g, KeyedStream& stream) {
  const std::size_t edges = g.row_cols.size() * kRowWeight;
  for (int pass = 0; pass < kCycleReductionPasses; ++pass) {
    bool any = false;
    for (std::size_t e = 0; e < edges; ++e) {
      if (g.cycles_at(g.row_of(e), g.col_of(e)) == 0) continue;
      any = true;
      for (int t = 0; t < kSwapTries; ++t) {
        const std::size_t f = stream.uniform_below(edges);
        const auto r1 = g.row_of(e), c1 = g.col_of(e);
        const auto r2 = g.row_of(f), c2 = g.col_of(f);
        if (r1 == r2 || c1 == c2 || g.col_has(c2, r1) || g.col_has(c1, r2)) continue;
        const int before = g.cycles_at(r1, c1) + g.cycles_at(r2, c2);
        g.swap_columns(e, f);
        const int after = g.cycles_at(r1, c2) + g.cycles_at(r2, c1);
        if (after < before) break;
        g.swap_columns(e, f);
      }
    }
    if (!any) break;
  }
}

// Reduced row echelon form in place; returns pivot columns by row.
std::vector<std::size_t> reduce_to_echelon(BitMatrix& h) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < h.cols() && row < h.rows(); ++c) {
    std::size_t sel = row;
    while (sel < h.rows() && !h.get(sel, c)) ++sel;
    if (sel == h.rows()) continue;
    h.swap_rows(sel, row);
    const std::size_t word = c >> 6;
    const std::uint64_t bit = std::uint64_t{1} << (c & 63);
    const auto pivot = h.row(row);
    for (std::size_t r = 0; r < h.rows(); ++r) {
      if (r == row) continue;
      auto target = h.row(r);
      if (!(target[word] & bit)) continue;
      for (std::size_t w = 0; w < target.size(); ++w) target[w] ^= pivot[w];
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

}  // namespace

BitMatrix LdpcCode::parity_check_dense() const {
  BitMatrix h(checks(), n());
  for (std::size_t r = 0; r < checks(); ++r) {
    for (auto c : row_columns_[r]) h.set(r, c, true);
  }
  return h;
}

std::size_t LdpcCode::four_cycles() const {
  std::size_t pairs = 0;
  std::vector<std::uint32_t> shared(n(), 0);
  for (std::size_t c = 0; c < n(); ++c) {
    std::vector<std::uint32_t> touched;
    for (auto r : column_checks_[c]) {
      for (auto c2 : row_columns_[r]) {
        if (c2 <= c) continue;
        if (shared[c2]++ == 0) touched.push_back(c2);
      }
    }
    for (auto c2 : touched) {
      pairs += static_cast<std::size_t>(shared[c2]) * (shared[c2] - 1) / 2;
      shared[c2] = 0;
    }
  }
  return pairs;
}

LdpcCode build_ldpc_code(const Seed& ldpc_seed, std::size_t k) {
  if (k < 8) throw CodeConstructionError("LDPC message length must be >= 8");
  const std::size_t n = 2 * k;
  const std::size_t m = n - k;

  for (int attempt = 0; attempt < kConstructionAttempts; ++attempt) {
    KeyedStream stream(ldpc_seed, StreamDomain::kLdpcConstruction,
                       static_cast<std::uint64_t>(attempt));
    Graph g = random_regular_graph(stream, n);
    if (!repair_parallel_edges(g, stream)) continue;
    reduce_four_cycles(g, stream);

    BitMatrix h(m, n);
    for (std::size_t r = 0; r < m; ++r) {
      for (auto c : g.row_cols[r]) h.set(r, c, true);
    }
    const auto pivots = reduce_to_echelon(h);
    if (pivots.size() != m) continue;

    // Information columns first, pivot columns after in pivot-row order, so
    // the reduced matrix reads [A | I] and the generator is [I | A^T].
    std::vector<std::uint8_t> is_pivot(n, 0);
    for (auto c : pivots) is_pivot[c] = 1;
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
      if (!is_pivot[c]) order.push_back(c);
    }
    order.insert(order.end(), pivots.begin(), pivots.end());
    std::vector<std::uint32_t> position(n);
    for (std::size_t i = 0; i < n; ++i) position[order[i]] = static_cast<std::uint32_t>(i);

    LdpcCode code;
    code.seed_ = ldpc_seed;
    code.column_checks_.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
      auto rows = g.col_rows[c];
      std::sort(rows.begin(), rows.end());
      code.column_checks_[position[c]] = rows;
    }
    code.row_columns_.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
      auto& cols = code.row_columns_[r];
      for (auto c : g.row_cols[r]) cols.push_back(position[c]);
      std::sort(cols.begin(), cols.end());
    }

    code.generator_ = BitMatrix(k, n);
    for (std::size_t j = 0; j < k; ++j) code.generator_.set(j, j, true);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (h.get(i, order[j])) code.generator_.set(j, k + i, true);
      }
    }
    return code;
  }
  throw CodeConstructionError("no full-rank parity-check matrix after " +
                              std::to_string(kConstructionAttempts) + " attempts");
}

BitVector ldpc_encode(const LdpcCode& code, std::span<const std::uint8_t> message) {
  if (message.size() != code.k()) {
    throw EncodeError("message has " + std::to_string(message.size()) +
                      " bits, code expects " + std::to_string(code.k()));
  }
  const BitMatrix& g = code.generator();
  std::vector<std::uint64_t> acc(g.words_per_row(), 0);
  for (std::size_t j = 0; j < message.size(); ++j) {
    if (!message[j]) continue;
    const auto row = g.row(j);
    for (std::size_t w = 0; w < acc.size(); ++w) acc[w] ^= row[w];
  }
  BitVector word(code.n());
  for (std::size_t i = 0; i < word.size(); ++i) {
    word[i] = static_cast<std::uint8_t>((acc[i >> 6] >> (i & 63)) & 1U);
  }
  return word;
}

bool satisfies_parity(const LdpcCode& code, std::span<const std::uint8_t> word) {
  if (word.size() != code.n()) return false;
  for (const auto& cols : code.row_columns()) {
    std::uint8_t parity = 0;
    for (auto c : cols) parity ^= word[c] & 1U;
    if (parity) return false;
  }
  return true;
}

DecodeResult ldpc_decode(const LdpcCode& code, const SoftWord& soft,
                         int max_iterations) {
  const std::size_t n = code.n();
  if (soft.values.size() != n) {
    throw EncodeError("soft word has " + std::to_string(soft.values.size()) +
                      " values, code expects " + std::to_string(n));
  }
  const double snr = std::min(soft.snr_db, kMaxSnrDb);
  const double sigma = std::pow(10.0, -snr / 20.0);
  const double scale = 2.0 / (sigma * sigma);

  constexpr double kLlrLimit = 60.0;
  constexpr double kTanhLimit = 1.0 - 1e-15;

  std::vector<double> channel(n);
  for (std::size_t i = 0; i < n; ++i) {
    channel[i] = std::clamp(scale * soft.values[i], -kLlrLimit, kLlrLimit);
  }

  // Edges grouped by row; col_edges maps each column to its three edges.
  const auto& rows = code.row_columns();
  std::vector<std::size_t> row_start(rows.size() + 1, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) row_start[r + 1] = row_start[r] + rows[r].size();
  const std::size_t edges = row_start.back();
  std::vector<std::uint32_t> edge_col(edges);
  std::vector<std::array<std::uint32_t, 3>> col_edges(n);
  std::vector<std::uint8_t> col_fill(n, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t s = 0; s < rows[r].size(); ++s) {
      const auto e = static_cast<std::uint32_t>(row_start[r] + s);
      const auto c = rows[r][s];
      edge_col[e] = c;
      col_edges[c][col_fill[c]++] = e;
    }
  }

  std::vector<double> v2c(edges), c2v(edges, 0.0), total(channel);
  for (std::size_t e = 0; e < edges; ++e) v2c[e] = channel[edge_col[e]];

  BitVector hard(n);
  auto decide = [&] {
    for (std::size_t i = 0; i < n; ++i) hard[i] = total[i] < 0.0 ? 1 : 0;
  };
  decide();

  DecodeResult result;
  result.converged = satisfies_parity(code, hard);
  std::vector<double> fwd, bwd, t;
  for (int it = 0; it < max_iterations && !result.converged; ++it) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t base = row_start[r];
      const std::size_t deg = row_start[r + 1] - base;
      t.resize(deg);
      fwd.resize(deg + 1);
      bwd.resize(deg + 1);
      for (std::size_t s = 0; s < deg; ++s) t[s] = std::tanh(0.5 * v2c[base + s]);
      fwd[0] = 1.0;
      for (std::size_t s = 0; s < deg; ++s) fwd[s + 1] = fwd[s] * t[s];
      bwd[deg] = 1.0;
      for (std::size_t s = deg; s > 0; --s) bwd[s - 1] = bwd[s] * t[s - 1];
      for (std::size_t s = 0; s < deg; ++s) {
        const double p = std::clamp(fwd[s] * bwd[s + 1], -kTanhLimit, kTanhLimit);
        c2v[base + s] = 2.0 * std::atanh(p);
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      const auto& es = col_edges[c];
      total[c] = channel[c] + c2v[es[0]] + c2v[es[1]] + c2v[es[2]];
      for (auto e : es) v2c[e] = total[c] - c2v[e];
    }
    decide();
    result.iterations = it + 1;
    result.converged = satisfies_parity(code, hard);
  }
  result.message.assign(hard.begin(), hard.begin() + static_cast<std::ptrdiff_t>(code.k()));
  return result;
}

void write_parity_adjacency(const LdpcCode& code, std::ostream& out) {
  const auto& rows = code.row_columns();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << r << ':';
    for (auto c : rows[r]) out << ' ' << c;
    out << '\n';
  }
}

}  // namespace tattooed
