#include "tattooed/keying.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <iterator>
#include <numeric>

#include "tattooed/errors.hpp"

namespace tattooed {
namespace {

Seed labelled_hash(std::span<const std::uint8_t> key, std::string_view label) {
  return sha256(key, {reinterpret_cast<const std::uint8_t*>(label.data()),
                      label.size()});
}

}  // namespace

SecretKey SecretKey::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBytes) {
    throw KeyFormatError("secret key must be 64 bytes, got " +
                         std::to_string(bytes.size()));
  }
  std::array<std::uint8_t, kBytes> b{};
  std::copy(bytes.begin(), bytes.end(), b.begin());
  return SecretKey(b);
}

SecretKey SecretKey::generate() {
  if (sodium_init() < 0) throw KeyFormatError("libsodium unavailable");
  std::array<std::uint8_t, kBytes> b{};
  randombytes_buf(b.data(), b.size());
  return SecretKey(b);
}

std::string SecretKey::id() const { return to_hex(sha256(bytes_)); }

SecretKey load_key_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KeyFormatError("cannot open key file " + path.string());
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (raw.size() == SecretKey::kBytes) return SecretKey::from_bytes(raw);

  std::string text(raw.begin(), raw.end());
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  text.erase(text.begin(), std::find_if(text.begin(), text.end(), not_space));
  text.erase(std::find_if(text.rbegin(), text.rend(), not_space).base(), text.end());
  std::array<std::uint8_t, SecretKey::kBytes> b{};
  if (text.size() != 2 * SecretKey::kBytes || !from_hex(text, b)) {
    throw KeyFormatError("key file " + path.string() +
                         " is neither 64 raw bytes nor 128 hex characters");
  }
  return SecretKey::from_bytes(b);
}

void save_key_file(const SecretKey& key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw KeyFormatError("cannot write key file " + path.string());
  out << to_hex(key.bytes()) << '\n';
}

DerivedSeeds derive_seeds(std::span<const std::uint8_t> key_bytes) {
  if (key_bytes.size() != SecretKey::kBytes) {
    throw KeyFormatError("secret key must be 64 bytes, got " +
                         std::to_string(key_bytes.size()));
  }
  return {labelled_hash(key_bytes, "code"), labelled_hash(key_bytes, "ldpc"),
          labelled_hash(key_bytes, "select")};
}

DerivedSeeds derive_seeds(const SecretKey& key) { return derive_seeds(key.bytes()); }

void spreading_code_packed(const Seed& code_seed, std::uint64_t bit_index,
                           std::span<std::uint8_t> out,
                           std::uint32_t first_block) {
  keystream_blocks(code_seed, StreamDomain::kSpreadingCode, bit_index,
                   first_block, out);
}

SignVector spreading_code(const Seed& code_seed, std::uint64_t bit_index,
                          std::size_t length) {
  if (length == 0) throw EmptyCodeError("spreading code length must be >= 1");
  std::vector<std::uint8_t> packed((length + 7) / 8);
  spreading_code_packed(code_seed, bit_index, packed);
  SignVector code(length);
  for (std::size_t r = 0; r < length; ++r) {
    code[r] = ((packed[r >> 3] >> (r & 7)) & 1U) ? 1 : -1;
  }
  return code;
}

SignVector generate_preamble(const Seed& code_seed) {
  std::array<std::uint8_t, kPreambleLength / 8> packed{};
  keystream_blocks(code_seed, StreamDomain::kPreamble, 0, 0, packed);
  SignVector preamble(kPreambleLength);
  for (std::size_t i = 0; i < kPreambleLength; ++i) {
    preamble[i] = ((packed[i >> 3] >> (i & 7)) & 1U) ? 1 : -1;
  }
  return preamble;
}

IndexSet seeded_prefix(const Seed& seed, StreamDomain domain, std::size_t total,
                       std::size_t count) {
  IndexSet perm(total);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  KeyedStream stream(seed, domain, 0);
  count = std::min(count, total);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + stream.uniform_below(total - i);
    std::swap(perm[i], perm[j]);
  }
  perm.resize(count);
  return perm;
}

IndexSet select_parameters(const Seed& select_seed, std::size_t total_params,
                           double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw SelectionError("selection ratio must lie in (0, 1]");
  }
  if (total_params == 0) throw SelectionError("model has no parameters");
  const auto count = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(total_params)));
  if (count == 0) throw SelectionError("selection ratio selects no parameters");

  IndexSet indices;
  if (count == total_params) {
    indices.resize(total_params);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
  } else {
    indices = seeded_prefix(select_seed, StreamDomain::kSelection, total_params, count);
    std::sort(indices.begin(), indices.end());
  }
  return indices;
}

}  // namespace tattooed
