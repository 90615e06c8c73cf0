#include "tlskit/rng.hpp"

#include <cmath>
#include <numbers>

namespace tlskit {

double SplitMix64::next_gaussian() {
  // next_unit() can return 0; shift into (0, 1] before the log.
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SplitMix64::next_poisson(double mean) {
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double chunk = mean > 60.0 ? 60.0 : mean;
    mean -= chunk;
    const double limit = std::exp(-chunk);
    double prod = next_unit();
    while (prod > limit) {
      ++total;
      prod *= next_unit();
    }
  }
  return total;
}

}  // namespace tlskit
