#pragma once

#include <cstdint>

namespace tlskit {

// SplitMix64 (Steele, Lea & Flood 2014; public-domain reference by Vigna).
// Chosen as the scene RNG because the full algorithm fits in a dozen lines,
// so ports in any language can reproduce byte-identical scenes from a seed.
//
// Substreams: substream(seed, k) seeds an independent generator with
// mix(seed XOR mix(k + 1)), where mix is the SplitMix64 output function.
// Derived variates consume a documented number of draws:
//   * next_unit(): one draw, 53-bit mantissa in [0, 1)
//   * next_gaussian(): exactly two draws (Box-Muller, cosine branch)
//   * next_poisson(mean): Knuth products over <= 60-unit chunks of the mean;
//     draw count is data-dependent but fully determined by the stream
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64(mix(seed ^ mix(stream + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Standard normal via Box-Muller, cosine branch only. Two draws per call.
  double next_gaussian();

  // Poisson count by Knuth's product-of-uniforms method, applied to chunks
  // of the mean no larger than 60 so exp(-chunk) stays in normal range.
  std::uint64_t next_poisson(double mean);

 private:
  std::uint64_t state_;
};

}  // namespace tlskit
