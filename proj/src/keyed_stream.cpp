#include "tattooed/keyed_stream.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tattooed {
namespace {

constexpr std::size_t kBlockBytes = 64;
__extension__ typedef unsigned __int128 u128;

void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> make_nonce(
    StreamDomain domain, std::uint64_t index) {
  std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(index >> (8 * i));
  const auto d = static_cast<std::uint32_t>(domain);
  for (int i = 0; i < 4; ++i) nonce[8 + i] = static_cast<std::uint8_t>(d >> (8 * i));
  return nonce;
}

}  // namespace

void keystream_blocks(const Seed& seed, StreamDomain domain,
                      std::uint64_t index, std::uint32_t first_block,
                      std::span<std::uint8_t> out) {
  ensure_sodium();
  static_assert(crypto_stream_chacha20_ietf_KEYBYTES == 32);
  const auto nonce = make_nonce(domain, index);
  // The xor variant is the only one taking an initial counter.
  std::memset(out.data(), 0, out.size());
  crypto_stream_chacha20_ietf_xor_ic(out.data(), out.data(), out.size(),
                                     nonce.data(), first_block, seed.data());
}

KeyedStream::KeyedStream(const Seed& seed, StreamDomain domain,
                         std::uint64_t index)
    : seed_(seed), domain_(domain), index_(index) {}

void KeyedStream::refill() {
  keystream_blocks(seed_, domain_, index_, next_block_, buffer_);
  next_block_ += static_cast<std::uint32_t>(buffer_.size() / kBlockBytes);
  pos_ = 0;
}

void KeyedStream::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buffer_.size()) refill();
    const std::size_t take = std::min(out.size() - done, buffer_.size() - pos_);
    std::memcpy(out.data() + done, buffer_.data() + pos_, take);
    pos_ += take;
    done += take;
  }
}

std::uint64_t KeyedStream::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t KeyedStream::uniform_below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection.
  u128 m = static_cast<u128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double KeyedStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double KeyedStream::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_normal_ = true;
  return r * std::cos(theta);
}

Seed sha256(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  ensure_sodium();
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  crypto_hash_sha256_update(&st, a.data(), a.size());
  if (!b.empty()) crypto_hash_sha256_update(&st, b.data(), b.size());
  Seed out{};
  crypto_hash_sha256_final(&st, out.data());
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto v : bytes) {
    s.push_back(kDigits[v >> 4]);
    s.push_back(kDigits[v & 0xF]);
  }
  return s;
}

bool from_hex(std::string_view hex, std::span<std::uint8_t> out) {
  if (hex.size() != out.size() * 2) return false;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return false;
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return true;
}

Seed seed_from_integer(std::string_view label, std::uint64_t value) {
  std::array<std::uint8_t, 8> le{};
  for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(value >> (8 * i));
  return sha256({reinterpret_cast<const std::uint8_t*>(label.data()), label.size()},
                le);
}

}  // namespace tattooed
