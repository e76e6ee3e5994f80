#include "carmacds/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "carmacds/errors.hpp"

namespace carmacds::levy {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

double nig_gamma(double alpha, double beta) {
  return std::sqrt(alpha * alpha - beta * beta);
}

// Inverse Gaussian IG(m, shape) via the Michael-Schucany-Haas transformation
// with rejection between the two roots.
double sample_inverse_gaussian(double m, double shape, RandomStream& rng) {
  double z = rng.normal();
  double nu = z * z;
  double x = m + (m * m * nu) / (2.0 * shape) -
             (m / (2.0 * shape)) *
                 std::sqrt(4.0 * m * shape * nu + m * m * nu * nu);
  if (x <= 0.0) x = 1e-300;  // cancellation guard for extreme draws
  double u = rng.uniform();
  if (u <= m / (m + x)) return x;
  return m * m / x;
}

}  // namespace

LevyDriver::LevyDriver(DriverKind kind, double p1, double p2, double p3,
                       double p4)
    : kind_(kind), p1_(p1), p2_(p2), p3_(p3), p4_(p4) {}

LevyDriver LevyDriver::brownian(double drift, double volatility) {
  require(std::isfinite(drift) && std::isfinite(volatility),
          "brownian: parameters must be finite");
  require(volatility > 0.0, "brownian: volatility must be > 0");
  return LevyDriver(DriverKind::Brownian, drift, volatility, 0.0, 0.0);
}

LevyDriver LevyDriver::compound_poisson_normal(double rate, double jump_mean,
                                               double jump_sd) {
  require(std::isfinite(rate) && std::isfinite(jump_mean) &&
              std::isfinite(jump_sd),
          "compound_poisson_normal: parameters must be finite");
  require(rate >= 0.0, "compound_poisson_normal: rate must be >= 0");
  require(jump_sd >= 0.0, "compound_poisson_normal: jump_sd must be >= 0");
  return LevyDriver(DriverKind::CompoundPoissonNormal, rate, jump_mean,
                    jump_sd, 0.0);
}

LevyDriver LevyDriver::nig(double alpha, double beta, double delta, double mu) {
  require(std::isfinite(alpha) && std::isfinite(beta) &&
              std::isfinite(delta) && std::isfinite(mu),
          "nig: parameters must be finite");
  require(alpha > 0.0, "nig: alpha must be > 0");
  require(std::abs(beta) < alpha, "nig: |beta| must be < alpha");
  require(delta > 0.0, "nig: delta must be > 0");
  return LevyDriver(DriverKind::Nig, alpha, beta, delta, mu);
}

double LevyDriver::drift() const { return p1_; }
double LevyDriver::volatility() const { return p2_; }
double LevyDriver::rate() const { return p1_; }
double LevyDriver::jump_mean() const { return p2_; }
double LevyDriver::jump_sd() const { return p3_; }
double LevyDriver::alpha() const { return p1_; }
double LevyDriver::beta() const { return p2_; }
double LevyDriver::delta() const { return p3_; }
double LevyDriver::mu() const { return p4_; }

nlohmann::json LevyDriver::to_json() const {
  switch (kind_) {
    case DriverKind::Brownian:
      return {{"kind", "brownian"}, {"drift", p1_}, {"volatility", p2_}};
    case DriverKind::CompoundPoissonNormal:
      return {{"kind", "cpn"},
              {"rate", p1_},
              {"jump_mean", p2_},
              {"jump_sd", p3_}};
    case DriverKind::Nig:
      return {{"kind", "nig"},
              {"alpha", p1_},
              {"beta", p2_},
              {"delta", p3_},
              {"mu", p4_}};
  }
  throw ArgumentError("to_json: unknown driver kind");
}

LevyDriver LevyDriver::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ArgumentError("driver json: object with \"kind\" expected");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "brownian")
      return brownian(j.at("drift").get<double>(),
                      j.at("volatility").get<double>());
    if (kind == "cpn")
      return compound_poisson_normal(j.at("rate").get<double>(),
                                     j.at("jump_mean").get<double>(),
                                     j.at("jump_sd").get<double>());
    if (kind == "nig")
      return nig(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                 j.at("delta").get<double>(), j.at("mu").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("driver json: ") + e.what());
  }
  throw ArgumentError("driver json: unknown kind \"" + kind + "\"");
}

double sample_increment(const LevyDriver& driver, double dt,
                        RandomStream& rng) {
  require(std::isfinite(dt) && dt > 0.0, "sample_increment: dt must be > 0");
  switch (driver.kind()) {
    case DriverKind::Brownian:
      return driver.drift() * dt +
             driver.volatility() * std::sqrt(dt) * rng.normal();
    case DriverKind::CompoundPoissonNormal: {
      std::uint64_t n = rng.poisson(driver.rate() * dt);
      double sum = 0.0;
      for (std::uint64_t i = 0; i < n; ++i)
        sum += driver.jump_mean() + driver.jump_sd() * rng.normal();
      return sum;
    }
    case DriverKind::Nig: {
      double g = nig_gamma(driver.alpha(), driver.beta());
      double m = driver.delta() * dt / g;
      double shape = driver.delta() * dt * driver.delta() * dt;
      double z = sample_inverse_gaussian(m, shape, rng);
      return driver.mu() * dt + driver.beta() * z +
             std::sqrt(z) * rng.normal();
    }
  }
  throw ArgumentError("sample_increment: unknown driver kind");
}

JumpRecord sample_jumps(const LevyDriver& driver, double dt,
                        RandomStream& rng) {
  require(std::isfinite(dt) && dt > 0.0, "sample_jumps: dt must be > 0");
  if (driver.kind() != DriverKind::CompoundPoissonNormal)
    throw UnsupportedDriverError(
        "sample_jumps: only the compound Poisson driver has retrievable "
        "jumps");
  std::uint64_t n = rng.poisson(driver.rate() * dt);
  JumpRecord rec;
  rec.times.resize(n);
  rec.sizes.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) rec.times[i] = rng.uniform() * dt;
  std::sort(rec.times.begin(), rec.times.end());
  for (std::uint64_t i = 0; i < n; ++i)
    rec.sizes[i] = driver.jump_mean() + driver.jump_sd() * rng.normal();
  return rec;
}

std::pair<double, double> moment_rates(const LevyDriver& driver) {
  switch (driver.kind()) {
    case DriverKind::Brownian:
      return {driver.drift(), driver.volatility() * driver.volatility()};
    case DriverKind::CompoundPoissonNormal: {
      double second = driver.jump_mean() * driver.jump_mean() +
                      driver.jump_sd() * driver.jump_sd();
      return {driver.rate() * driver.jump_mean(), driver.rate() * second};
    }
    case DriverKind::Nig: {
      double g = nig_gamma(driver.alpha(), driver.beta());
      double mean = driver.mu() + driver.delta() * driver.beta() / g;
      double var = driver.delta() * driver.alpha() * driver.alpha() /
                   (g * g * g);
      return {mean, var};
    }
  }
  throw ArgumentError("moment_rates: unknown driver kind");
}

}  // namespace carmacds::levy
