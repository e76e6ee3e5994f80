#pragma once

#include <cstdint>
#include <random>

namespace carmacds {

// Deterministic random stream. All samplers are hand-rolled on top of the raw
// mt19937_64 output so that a given (binary, seed) pair reproduces bit-for-bit;
// std::*_distribution algorithms are implementation-defined and would not.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Uniform on (0,1), 53-bit resolution, never exactly 0 or 1.
  double uniform();

  // Standard normal (Box-Muller, cosine branch only, stateless).
  double normal();

  // Exponential with rate 1.
  double exponential();

  // Poisson count. Knuth product method; for large means the draw is split
  // recursively using Poisson additivity, so it stays exact.
  std::uint64_t poisson(double mean);

  // Independent stream derived from (seed, index) via splitmix64 mixing.
  // Streams with distinct indices never share engine state.
  RandomStream substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace carmacds
