#pragma once

#include <cstdint>
#include <string_view>

namespace adafuse {

/// SplitMix64 (Steele, Lea, Flood 2014). Chosen over <random> engines because
/// its output is pinned by the algorithm itself, so every artifact produced
/// from a seed is byte-identical across compilers and platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n). Plain modulo draw; the bias is below 2^-50 for
  /// any n this library uses and the result is reproducible everywhere.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  bool next_bool(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

/// FNV-1a over the raw bytes of a string. Used to fold sample ids into
/// stream seeds so that adding or reordering samples never perturbs the
/// random stream of any other sample.
inline std::uint64_t hash_bytes(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}
}  // namespace detail

/// Derives an independent stream seed from a root seed and a list of parts
/// (hashed strings, indices, stream tags). Each part is absorbed through the
/// SplitMix64 finalizer, so streams for different parts are uncorrelated.
template <typename... Parts>
std::uint64_t derive_stream(std::uint64_t seed, Parts... parts) {
  std::uint64_t s = detail::mix64(seed ^ 0x9E3779B97F4A7C15ULL);
  ((s = detail::mix64(s ^ static_cast<std::uint64_t>(parts))), ...);
  return s;
}

}  // namespace adafuse
