#include "carmacds/random.hpp"

#include <cmath>

#include "carmacds/errors.hpp"

namespace carmacds {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomStream::uniform() {
  // High 53 bits give a uniform on [0,1) at full double resolution; reject 0
  // so log() and Box-Muller stay finite.
  for (;;) {
    double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double RandomStream::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RandomStream::exponential() { return -std::log(uniform()); }

std::uint64_t RandomStream::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean))
    throw ArgumentError("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean > 30.0) {
    // Exact split: Poisson(m) = Poisson(m/2) + Poisson(m/2).
    double half = mean / 2.0;
    return poisson(half) + poisson(half);
  }
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = uniform();
  while (prod > limit) {
    ++k;
    prod *= uniform();
  }
  return k;
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  std::uint64_t derived = splitmix64(seed_ ^ splitmix64(index + 1));
  return RandomStream(derived);
}

}  // namespace carmacds
