#include "carmacds/credit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carmacds/errors.hpp"

namespace carmacds::credit {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

// Pairwise summation keeps ensemble reductions deterministic and accurate
// regardless of evaluation order elsewhere.
double pairwise_sum(const double* x, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

}  // namespace

RecoveryParams RecoveryParams::constant(double R) {
  require(std::isfinite(R) && R > 0.0 && R < 1.0,
          "recovery: constant R must lie in (0,1)");
  RecoveryParams p;
  p.mode_ = RecoveryMode::Constant;
  p.r_ = R;
  return p;
}

RecoveryParams RecoveryParams::stochastic(double beta0, double beta1,
                                          double beta2) {
  require(std::isfinite(beta0) && beta0 > 0.0 && beta0 < 1.0,
          "recovery: beta0 must lie in (0,1)");
  require(std::isfinite(beta2) && beta2 > 0.0 && beta2 < 1.0,
          "recovery: beta2 must lie in (0,1)");
  require(std::isfinite(beta1) && beta1 <= 0.0, "recovery: beta1 must be <= 0");
  RecoveryParams p;
  p.mode_ = RecoveryMode::Stochastic;
  p.b0_ = beta0;
  p.b1_ = beta1;
  p.b2_ = beta2;
  p.range_warning_ = (beta0 + beta2 >= 1.0);
  return p;
}

double RecoveryParams::R() const {
  require(mode_ == RecoveryMode::Constant, "recovery: not Constant mode");
  return r_;
}
double RecoveryParams::beta0() const {
  require(mode_ == RecoveryMode::Stochastic, "recovery: not Stochastic mode");
  return b0_;
}
double RecoveryParams::beta1() const {
  require(mode_ == RecoveryMode::Stochastic, "recovery: not Stochastic mode");
  return b1_;
}
double RecoveryParams::beta2() const {
  require(mode_ == RecoveryMode::Stochastic, "recovery: not Stochastic mode");
  return b2_;
}

double recovery_rate(const RecoveryParams& params, double gamma) {
  if (params.mode() == RecoveryMode::Constant) return params.R();
  require(std::isfinite(gamma) && gamma > 0.0,
          "recovery_rate: gamma must be > 0");
  return params.beta2() + params.beta0() * std::exp(params.beta1() * gamma);
}

double credit_triangle_spread(const RecoveryParams& params, double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0,
          "credit_triangle_spread: gamma must be > 0");
  double spread = (1.0 - recovery_rate(params, gamma)) * gamma;
  if (spread <= 0.0)
    throw ArgumentError(
        "credit_triangle_spread: recovery >= 1 makes the spread non-positive");
  return spread;
}

double invert_spread(const RecoveryParams& params, double spread) {
  require(std::isfinite(spread) && spread > 0.0,
          "invert_spread: spread must be > 0");
  if (params.mode() == RecoveryMode::Constant)
    return spread / (1.0 - params.R());

  const double b0 = params.beta0();
  const double b2 = params.beta2();
  if (b0 + b2 >= 1.0)
    throw NonInvertibleParamsError(
        "invert_spread: beta0 + beta2 >= 1, spread map is not strictly "
        "increasing from 0");
  // (1-R(g))g is strictly increasing with slope in [1-b2-b0, 1), so the root
  // is bracketed by [spread, spread/(1-b0-b2)].
  double lo = spread;
  double hi = spread / (1.0 - b0 - b2);
  const double b1 = params.beta1();
  auto f = [&](double g) {
    return (1.0 - b2 - b0 * std::exp(b1 * g)) * g - spread;
  };
  if (f(lo) > 0.0) return lo;  // b1 == 0 degenerate: slope constant 1-b2-b0
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

GeneratedPaths generate_spread_path(const carma::CarmaSpec& spec,
                                    const levy::LevyDriver& driver,
                                    const RecoveryParams& params, double c0,
                                    double h, int n_steps, RandomStream& rng,
                                    double tenor) {
  require(std::isfinite(c0) && c0 > 0.0,
          "generate_spread_path: c0 must be > 0");
  require(tenor > 0.0, "generate_spread_path: tenor must be > 0");
  GeneratedPaths out;
  out.state = carma::simulate(spec, driver, h, n_steps, std::nullopt, rng);
  out.spread.times = out.state.times;
  out.spread.tenor = tenor;
  out.spread.premium.resize(out.state.times.size());
  out.intensity.times = out.state.times;
  out.intensity.gamma.resize(out.state.times.size());

  double log_c = std::log(c0);
  for (size_t k = 0; k < out.state.times.size(); ++k) {
    if (k > 0) {
      double dlog = carma::integrated_output(out.state, out.state.times[k - 1],
                                             out.state.times[k]);
      log_c += dlog;
    }
    double c = std::exp(log_c);
    out.spread.premium[k] = c;
    out.intensity.gamma[k] = invert_spread(params, c);
  }
  return out;
}

GeneratedPaths generate_intensity_model_path(const carma::CarmaSpec& spec,
                                             const levy::LevyDriver& driver,
                                             const RecoveryParams& params,
                                             double gamma0, double h,
                                             int n_steps, RandomStream& rng,
                                             double tenor) {
  require(std::isfinite(gamma0) && gamma0 > 0.0,
          "generate_intensity_model_path: gamma0 must be > 0");
  require(tenor > 0.0, "generate_intensity_model_path: tenor must be > 0");
  GeneratedPaths out;
  out.state = carma::simulate(spec, driver, h, n_steps, std::nullopt, rng);
  out.spread.times = out.state.times;
  out.spread.tenor = tenor;
  out.spread.premium.resize(out.state.times.size());
  out.intensity.times = out.state.times;
  out.intensity.gamma.resize(out.state.times.size());

  double log_g = std::log(gamma0);
  for (size_t k = 0; k < out.state.times.size(); ++k) {
    if (k > 0) log_g += h * out.state.outputs[k];
    double g = std::exp(log_g);
    out.intensity.gamma[k] = g;
    out.spread.premium[k] = credit_triangle_spread(params, g);
  }
  return out;
}

std::optional<double> simulate_default_time(const IntensityPath& gamma_path,
                                            RandomStream& rng) {
  const size_t n = gamma_path.times.size();
  require(n >= 2 && gamma_path.gamma.size() == n,
          "simulate_default_time: need a path with at least two points");
  for (double g : gamma_path.gamma)
    require(std::isfinite(g) && g >= 0.0,
            "simulate_default_time: intensities must be >= 0");

  const double target = rng.exponential();
  double cum = 0.0;
  for (size_t k = 1; k < n; ++k) {
    double dt = gamma_path.times[k] - gamma_path.times[k - 1];
    double inc = 0.5 * (gamma_path.gamma[k - 1] + gamma_path.gamma[k]) * dt;
    if (cum + inc >= target) {
      if (inc <= 0.0) return gamma_path.times[k];
      double w = (target - cum) / inc;
      return gamma_path.times[k - 1] + w * dt;
    }
    cum += inc;
  }
  return std::nullopt;
}

FairSpreadResult fair_spread_mc(const std::vector<IntensityPath>& gamma_paths,
                                const RecoveryParams& params,
                                const DiscountCurve& curve, double s,
                                double tenor) {
  if (gamma_paths.empty())
    throw ArgumentError("fair_spread: empty path ensemble");
  require(std::isfinite(s) && std::isfinite(tenor) && tenor > 0.0,
          "fair_spread: need finite s and tenor > 0");
  require(curve.short_rate >= 0.0, "fair_spread: short rate must be >= 0");

  const size_t m = gamma_paths.size();
  std::vector<double> protection(m), premium(m);
  for (size_t i = 0; i < m; ++i) {
    const IntensityPath& path = gamma_paths[i];
    const size_t n = path.times.size();
    require(n >= 2 && path.gamma.size() == n, "fair_spread: degenerate path");
    require(path.times.front() <= s + 1e-12 &&
                path.times.back() >= s + tenor - 1e-12,
            "fair_spread: every path must cover [s, s+tenor]");

    // Node values of both integrands; survival uses the running trapezoid
    // hazard from the path start.
    double cum_hazard = 0.0;
    double num = 0.0, den = 0.0;
    double prev_num = 0.0, prev_den = 0.0;
    bool have_prev = false;
    for (size_t k = 0; k < n; ++k) {
      if (k > 0)
        cum_hazard += 0.5 * (path.gamma[k - 1] + path.gamma[k]) *
                      (path.times[k] - path.times[k - 1]);
      double t = path.times[k];
      if (t < s - 1e-12) continue;
      if (t > s + tenor + 1e-12) break;
      double disc = std::exp(-curve.short_rate * (t - s));
      double surv = std::exp(-cum_hazard);
      double g = path.gamma[k];
      double node_den = disc * surv;
      double node_num = (1.0 - recovery_rate(params, g)) * g * node_den;
      if (have_prev) {
        double dt = t - (k > 0 ? path.times[k - 1] : t);
        num += 0.5 * (prev_num + node_num) * dt;
        den += 0.5 * (prev_den + node_den) * dt;
      }
      prev_num = node_num;
      prev_den = node_den;
      have_prev = true;
    }
    protection[i] = num;
    premium[i] = den;
  }

  double mean_num = pairwise_sum(protection) / static_cast<double>(m);
  double mean_den = pairwise_sum(premium) / static_cast<double>(m);
  if (mean_den <= 0.0)
    throw SingularityError("fair_spread: premium leg integrated to zero");

  FairSpreadResult result;
  result.value = mean_num / mean_den;
  if (m > 1) {
    // Delta method for the ratio of means: var = var(num_i - c den_i)/(m den^2).
    std::vector<double> resid(m);
    for (size_t i = 0; i < m; ++i)
      resid[i] = protection[i] - result.value * premium[i];
    double ss = 0.0;
    for (double v : resid) ss += v * v;
    ss /= static_cast<double>(m - 1);
    result.std_error =
        std::sqrt(ss / static_cast<double>(m)) / mean_den;
  }
  return result;
}

double fair_spread(const std::vector<IntensityPath>& gamma_paths,
                   const RecoveryParams& params, const DiscountCurve& curve,
                   double s, double tenor) {
  return fair_spread_mc(gamma_paths, params, curve, s, tenor).value;
}

}  // namespace carmacds::credit
