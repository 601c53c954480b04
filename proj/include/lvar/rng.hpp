#pragma once

#include <cstdint>

namespace lvar {

// Deterministic counter-based generator used everywhere the library needs
// randomness.
//
// A stream is a pure function of (seed, stream_id, counter):
//
//   key      = mix(mix(seed + GOLDEN) ^ (stream_id + WEYL))
//   draw(i)  = mix(key + (i + 1) * GOLDEN)          i = 0, 1, 2, ...
//
// where mix is the SplitMix64 output function. Distinct stream ids give
// statistically independent substreams, so callers hand one stream per work
// item (pair index, bootstrap replicate, ...) and may evaluate items in any
// order and on any number of threads without changing results.
//
// Normal deviates use the Box-Muller transform: exactly two uniforms per two
// normals, no rejection step, so the draw count per item is fixed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(derive_key(seed, stream_id)) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_open01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n) via the 128-bit multiply-shift reduction.
  // Bias is at most n / 2^64, which is irrelevant at the sample sizes used
  // here and keeps the draw count deterministic.
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal deviate (Box-Muller, cached second output).
  double normal();

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kWeyl = 0xD1B54A32D192ED03ull;

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
    return mix(mix(seed + kGolden) ^ (stream_id + kWeyl));
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lvar
