#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace bitmcts {

// SplitMix64. Fixed constants, identical streams on every platform, which is
// what makes seeded runs byte-reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). Modulo bias is irrelevant at our bounds (< 2^32).
  std::uint64_t below(std::uint64_t bound) { return bound ? next() % bound : 0; }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// FNV-1a, 64-bit. Used to derive deterministic streams from structured
// inputs (seed + outline + direction + tag) without std::hash, whose spread
// is implementation-defined.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::uint64_t value, std::uint64_t h = 0xCBF29CE484222325ull) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (i * 8)) & 0xFF;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Accumulating hasher for multi-field keys.
class HashStream {
 public:
  HashStream& add(std::string_view s) {
    hash_ = fnv1a64(s, hash_);
    hash_ = fnv1a64(std::string_view("\x1f", 1), hash_);  // field separator
    return *this;
  }
  HashStream& add(std::uint64_t v) {
    hash_ = fnv1a64(v, hash_);
    return *this;
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

// Full-avalanche finalizer. FNV digests have weak low bits, so any modulo
// reduction must pass through this first.
inline std::uint64_t mix64(std::uint64_t x) { return SplitMix64(x).next(); }

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

// Seeded Fisher-Yates permutation of [0, n).
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace bitmcts
