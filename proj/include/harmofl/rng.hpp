#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace harmofl {

// Stream tags keep independently keyed generators from colliding.
enum class StreamTag : std::uint64_t {
  kParamInit = 0x01,
  kBatchSampling = 0x02,
  kDatasetLabel = 0x03,
  kDatasetGeometry = 0x04,
  kDatasetNoise = 0x05,
  kLandscapeDirections = 0x06,
};

// Deterministic splitmix64 stream. The state walks a fixed Weyl sequence from
// the key, so equal keys always reproduce the same values regardless of what
// other generators are doing (no shared state, safe across threads).
class CounterRng {
 public:
  explicit CounterRng(std::initializer_list<std::uint64_t> key_words) {
    std::uint64_t k = 0x6a09e667f3bcc909ull;
    for (std::uint64_t w : key_words) k = mix(k ^ w);
    state_ = k;
  }

  CounterRng(StreamTag tag, std::initializer_list<std::uint64_t> key_words)
      : CounterRng(key_words) {
    state_ = mix(state_ ^ static_cast<std::uint64_t>(tag));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    return mix(z);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; consumes two uniforms per call so the stream position does
  // not depend on caller history.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Uniform integer in [0, n). Lemire multiply-shift; the 2^-64 bias is
  // irrelevant here, determinism is what matters.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace harmofl
