#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "carmacds/random.hpp"

namespace carmacds::levy {

enum class DriverKind { Brownian, CompoundPoissonNormal, Nig };

// Jump times sorted ascending within (0, dt]; sizes[i] belongs to times[i].
struct JumpRecord {
  std::vector<double> times;
  std::vector<double> sizes;
};

class LevyDriver {
 public:
  static LevyDriver brownian(double drift, double volatility);
  static LevyDriver compound_poisson_normal(double rate, double jump_mean,
                                            double jump_sd);
  static LevyDriver nig(double alpha, double beta, double delta, double mu);

  DriverKind kind() const { return kind_; }

  // Brownian accessors.
  double drift() const;
  double volatility() const;
  // Compound Poisson accessors.
  double rate() const;
  double jump_mean() const;
  double jump_sd() const;
  // NIG accessors.
  double alpha() const;
  double beta() const;
  double delta() const;
  double mu() const;

  nlohmann::json to_json() const;
  static LevyDriver from_json(const nlohmann::json& j);

 private:
  LevyDriver(DriverKind kind, double p1, double p2, double p3, double p4);

  DriverKind kind_;
  double p1_, p2_, p3_, p4_;
};

// Exact draw of L(t+dt) - L(t). dt must be > 0.
double sample_increment(const LevyDriver& driver, double dt, RandomStream& rng);

// Jump times and sizes over (0, dt]. Compound Poisson only; other drivers
// raise the unsupported-driver error.
JumpRecord sample_jumps(const LevyDriver& driver, double dt, RandomStream& rng);

// (mean rate, variance rate) per unit time.
std::pair<double, double> moment_rates(const LevyDriver& driver);

}  // namespace carmacds::levy
