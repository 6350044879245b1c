#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "tattooed/keying.hpp"
#include "tattooed/model_io.hpp"
#include "tattooed/spread.hpp"

namespace testing {

using namespace tattooed;

inline SecretKey test_key(std::uint64_t i) {
  const Seed lo = seed_from_integer("test-key", i);
  const Seed hi = sha256(lo);
  std::array<std::uint8_t, 64> b{};
  std::copy(lo.begin(), lo.end(), b.begin());
  std::copy(hi.begin(), hi.end(), b.begin() + 32);
  return SecretKey::from_bytes(b);
}

inline Seed test_seed(const char* label, std::uint64_t i) { return seed_from_integer(label, i); }

/// 784-192-190-56-10 dense network: 198,656 parameters with biases.
inline const std::vector<std::size_t>& fixture_layers() {
  static const std::vector<std::size_t> sizes{784, 192, 190, 56, 10};
  return sizes;
}

inline TensorContainer fixture_model(std::uint64_t i) {
  return synth_model(fixture_layers(), test_seed("fixture", i));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Reference embedding straight from the definition: one full code per bit,
/// integer chip sums, a single rounding per weight.
inline std::vector<float> naive_embed(const std::vector<float>& w, const SignVector& bits,
                                      double gamma, const IndexSet& indices, const Seed& seed) {
  std::vector<long long> sum(indices.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const SignVector c = spreading_code(seed, i, indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) sum[r] += c[r] * bits[i];
  }
  std::vector<float> out = w;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out[indices[r]] = static_cast<float>(static_cast<double>(w[indices[r]]) +
                                         gamma * static_cast<double>(sum[r]));
  }
  return out;
}

inline std::vector<double> naive_extract(const std::vector<float>& marked,
                                         const std::vector<float>& base, const IndexSet& indices,
                                         const Seed& seed, std::size_t bits) {
  std::vector<double> y(bits, 0.0);
  for (std::size_t i = 0; i < bits; ++i) {
    const SignVector c = spreading_code(seed, i, indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      y[i] += c[r] * (static_cast<double>(marked[indices[r]]) - base[indices[r]]);
    }
  }
  return y;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "tattooed-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
