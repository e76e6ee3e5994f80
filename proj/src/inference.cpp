#include "carmacds/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "carmacds/errors.hpp"
#include "carmacds/format.hpp"

namespace carmacds::inference {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kJitter = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

double sample_variance(const std::vector<double>& y) {
  const size_t n = y.size();
  double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(n - 1);
}

// Scalar filter for p = 1; identical recursion to the general path without
// the matrix overhead (this sits inside the MCMC hot loop).
double kalman_loglik_car1(double a1, double mr, double vr,
                          const std::vector<double>& y, double h) {
  if (!(a1 > 0.0))
    throw StationarityError(
        "kalman_loglik: autoregressive root must have negative real part");
  const double phi = std::exp(-a1 * h);
  const double sigma = vr / (2.0 * a1);
  const double q = sigma * (1.0 - phi * phi);
  const double xbar = mr / a1;
  const double cmean = xbar * (1.0 - phi);

  double x = xbar;
  double P = sigma;
  double ll = 0.0;
  const size_t n = y.size();
  for (size_t k = 0; k < n; ++k) {
    double S = P + kJitter;
    if (!(S > 0.0) || !std::isfinite(S))
      throw ConditioningError(
          "kalman_loglik: predicted variance lost positivity at iteration " +
          std::to_string(k));
    double nu = y[k] - x;
    ll -= 0.5 * (kLog2Pi + std::log(S) + nu * nu / S);
    double K = P / S;
    x += K * nu;
    P *= (1.0 - K) * (1.0 - K);
    x = phi * x + cmean;
    P = phi * phi * P + q;
  }
  return ll;
}

double kalman_loglik_general(const carma::CarmaSpec& spec, double mr,
                             double vr, const std::vector<double>& y,
                             double h) {
  carma::CompanionSystem sys = carma::build_system(spec);
  if (!carma::is_stationary(sys))
    throw StationarityError(
        "kalman_loglik: autoregressive roots must have negative real parts");
  const int p = spec.p;
  carma::DiscreteMoments dm = carma::discrete_moments(sys, h);
  carma::StationaryMoments mom = carma::stationary_covariance(spec, vr);

  Eigen::VectorXd x = mr == 0.0
                          ? Eigen::VectorXd::Zero(p).eval()
                          : (-sys.A.fullPivLu().solve(sys.e * mr)).eval();
  Eigen::MatrixXd P = mom.Sigma;
  const Eigen::VectorXd b = spec.b;
  const Eigen::MatrixXd Phi = dm.Phi;
  const Eigen::MatrixXd Q = vr * dm.Q;
  const Eigen::VectorXd cmean = mr * dm.m1;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);

  Eigen::VectorXd Pb(p), K(p), xtmp(p);
  Eigen::MatrixXd IKb(p, p), T(p, p), Ptmp(p, p);
  double ll = 0.0;
  const size_t n = y.size();
  for (size_t k = 0; k < n; ++k) {
    Pb.noalias() = P * b;
    double S = b.dot(Pb) + kJitter;
    if (!(S > 0.0) || !std::isfinite(S))
      throw ConditioningError(
          "kalman_loglik: predicted variance lost positivity at iteration " +
          std::to_string(k));
    double nu = y[k] - b.dot(x);
    ll -= 0.5 * (kLog2Pi + std::log(S) + nu * nu / S);
    K = Pb / S;
    x.noalias() += K * nu;
    IKb.noalias() = I - K * b.transpose();
    T.noalias() = IKb * P;
    P.noalias() = T * IKb.transpose();
    xtmp.noalias() = Phi * x + cmean;
    x = xtmp;
    T.noalias() = Phi * P;
    Ptmp.noalias() = T * Phi.transpose();
    P = Ptmp + Q;
  }
  if (!std::isfinite(ll))
    throw ConditioningError("kalman_loglik: likelihood became non-finite");
  return ll;
}

// ----------------------------------------------------------------------
// Nelder-Mead simplex minimizer.

struct NmResult {
  Eigen::VectorXd x;
  double f = kInf;
  bool converged = false;
};

NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                     int max_iters, double fatol, double xatol) {
  const int d = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(static_cast<size_t>(d) + 1, x0);
  std::vector<double> fs(static_cast<size_t>(d) + 1);
  for (int i = 0; i < d; ++i) xs[static_cast<size_t>(i) + 1](i) += step(i);
  for (size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);

  std::vector<size_t> order(xs.size());
  NmResult res;
  for (int iter = 0; iter < max_iters; ++iter) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return fs[a] < fs[b]; });
    const size_t best = order.front(), worst = order.back();
    const size_t second_worst = order[order.size() - 2];

    double fspread = fs[worst] - fs[best];
    double xspread = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
      xspread = std::max(xspread,
                         (xs[i] - xs[best]).lpNorm<Eigen::Infinity>());
    if (fspread <= fatol * (1.0 + std::abs(fs[best])) && xspread <= xatol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (size_t i = 0; i < xs.size(); ++i)
      if (i != worst) centroid += xs[i];
    centroid /= static_cast<double>(d);

    Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    double fr = f(xr);
    if (fr < fs[best]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (xs[worst] - centroid);
      double fc = f(xc);
      if (fc < fs[worst]) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (size_t i = 0; i < xs.size(); ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  size_t best = 0;
  for (size_t i = 1; i < xs.size(); ++i)
    if (fs[i] < fs[best]) best = i;
  res.x = xs[best];
  res.f = fs[best];
  return res;
}

// ----------------------------------------------------------------------
// Parameter packing for fit_carma.

struct Packed {
  carma::CarmaSpec spec;
  double variance_rate = 0.0;
};

std::vector<double> poly_from_roots(const Eigen::VectorXd& roots) {
  // Monic expansion: returns (a_1..a_p) for prod (z - r_i).
  const int p = static_cast<int>(roots.size());
  std::vector<double> c(static_cast<size_t>(p) + 1, 0.0);
  c[0] = 1.0;
  for (int i = 0; i < p; ++i) {
    for (int k = i + 1; k >= 1; --k) c[static_cast<size_t>(k)] -= roots(i) * c[static_cast<size_t>(k) - 1];
  }
  return {c.begin() + 1, c.end()};
}

Packed unpack(const Eigen::VectorXd& theta, int p, int q) {
  Eigen::VectorXd roots(p);
  for (int i = 0; i < p; ++i) roots(i) = -std::exp(theta(i));
  std::vector<double> a = poly_from_roots(roots);
  std::vector<double> bfree(static_cast<size_t>(q));
  for (int j = 0; j < q; ++j) bfree[static_cast<size_t>(j)] = theta(p + j);
  Packed out;
  out.spec = carma::CarmaSpec::from_free(a, bfree);
  out.variance_rate = std::exp(theta(p + q));
  return out;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double idx = prob * static_cast<double>(n - 1);
  size_t lo = static_cast<size_t>(std::floor(idx));
  if (lo >= n - 1) return sorted[n - 1];
  double w = idx - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[lo + 1];
}

std::string model_name(Model m) { return m == Model::Srr ? "srr" : "crr"; }

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

double kalman_loglik(const carma::CarmaSpec& spec,
                     std::pair<double, double> driver_moments,
                     const std::vector<double>& y, double h) {
  const auto [mr, vr] = driver_moments;
  require(std::isfinite(h) && h > 0.0, "kalman_loglik: h must be > 0");
  require(std::isfinite(mr) && std::isfinite(vr) && vr >= 0.0,
          "kalman_loglik: driver moments must be finite with variance >= 0");
  require(static_cast<int>(y.size()) >= spec.p + 2,
          "kalman_loglik: need at least p+2 observations");
  for (double v : y)
    require(std::isfinite(v), "kalman_loglik: observations must be finite");
  if (spec.p == 1) return kalman_loglik_car1(spec.a(0), mr, vr, y, h);
  return kalman_loglik_general(spec, mr, vr, y, h);
}

CarmaFit fit_carma(const std::vector<double>& y, double h,
                   const FitConfig& config, RandomStream& rng) {
  require(y.size() >= 50, "fit_carma: need at least 50 observations");
  require(std::isfinite(h) && h > 0.0, "fit_carma: h must be > 0");
  const int p = config.p, q = config.q;
  require(p >= 1 && q >= 0 && q < p, "fit_carma: need p >= 1 and 0 <= q < p");
  const OptimizerConfig& opt = config.optimizer;
  require(opt.n_starts >= 1 && opt.max_iters >= 1 &&
              opt.root_min > 0.0 && opt.root_max > opt.root_min,
          "fit_carma: invalid optimizer config");
  for (double v : y)
    require(std::isfinite(v), "fit_carma: observations must be finite");

  const double var_y = sample_variance(y);
  if (!(var_y > 0.0))
    throw OptimizationFailure("fit_carma: constant series has no CARMA fit");

  const int dim = p + q + 1;
  const double umin = std::log(opt.root_min);
  const double umax = std::log(opt.root_max);

  auto objective = [&](const Eigen::VectorXd& theta) -> double {
    for (int i = 0; i < p; ++i)
      if (theta(i) < umin || theta(i) > umax) return 1e300;
    for (int j = 0; j < q; ++j)
      if (std::abs(theta(p + j)) > 1e4) return 1e300;
    if (std::abs(theta(p + q)) > 120.0) return 1e300;
    try {
      Packed packed = unpack(theta, p, q);
      return -kalman_loglik(packed.spec, {0.0, packed.variance_rate}, y, h);
    } catch (const NumericalError&) {
      return 1e300;
    }
  };

  // Random stationary starts: log-uniform roots within the bound box,
  // variance rate matched to the sample variance of the start's own spec.
  const double lo_start = std::max(opt.root_min, 0.02);
  const double hi_start = std::max(1.5 * lo_start,
                                   std::min(opt.root_max, 6.0 / h));

  NmResult best;
  bool any_finite = false;
  for (int s = 0; s < opt.n_starts; ++s) {
    Eigen::VectorXd theta0(dim);
    for (int i = 0; i < p; ++i)
      theta0(i) = std::log(lo_start) +
                  rng.uniform() * (std::log(hi_start) - std::log(lo_start));
    for (int j = 0; j < q; ++j) theta0(p + j) = 0.05 + 1.95 * rng.uniform();
    double v_unit = 1.0;
    try {
      Packed start = unpack(theta0, p, q);
      carma::StationaryMoments mom =
          carma::stationary_covariance(start.spec, 1.0);
      v_unit = std::max(mom.acvf(0.0), 1e-300);
    } catch (const NumericalError&) {
    }
    theta0(p + q) = std::log(var_y / v_unit);

    Eigen::VectorXd step = Eigen::VectorXd::Constant(dim, 0.25);
    step(p + q) = 0.5;
    NmResult run = nelder_mead(objective, theta0, step, opt.max_iters,
                               1e-10, 1e-7);
    if (std::isfinite(run.f) && run.f < 1e299) any_finite = true;
    if (run.f < best.f || best.x.size() == 0) best = run;
  }
  if (!any_finite)
    throw OptimizationFailure(
        "fit_carma: no start converged to a finite quasi-likelihood (best "
        "objective " +
        fmt_g17(best.f) + ")");

  // Polish: restart a tight simplex at the winner so the reported optimum is
  // a stationary point at finite-difference resolution.
  Eigen::VectorXd polish_step = Eigen::VectorXd::Constant(dim, 5e-4);
  NmResult polished =
      nelder_mead(objective, best.x, polish_step, 400, 1e-11, 1e-8);
  if (polished.f < best.f) {
    polished.converged = polished.converged || best.converged;
    best = polished;
  }

  Packed fitted = unpack(best.x, p, q);
  CarmaFit fit;
  fit.spec = fitted.spec;
  fit.mean_rate = 0.0;
  fit.variance_rate = fitted.variance_rate;
  fit.loglik = -best.f;
  fit.converged = best.converged;
  if (fit.variance_rate < 1e-10 * var_y)
    fit.warnings.push_back("near-zero variance rate: series may be constant "
                           "or the model degenerate");
  return fit;
}

McmcResult fit_beta_mcmc(const credit::SpreadPath& spreads,
                         const FitConfig& config, const CarmaFit& carma_fit,
                         RandomStream& rng) {
  if (config.model == Model::Crr)
    throw UnsupportedConfigError(
        "fit_beta_mcmc: constant-recovery mode has no beta posterior");
  const McmcConfig& mc = config.mcmc;
  if (mc.n_samples <= 0)
    throw ArgumentError("fit_beta_mcmc: chain length after burn-in must be "
                        ">= 1");
  require(mc.burn_in >= 0, "fit_beta_mcmc: burn_in must be >= 0");
  require(mc.credible_level > 0.0 && mc.credible_level < 1.0,
          "fit_beta_mcmc: credible_level must lie in (0,1)");
  const double B = mc.beta1_prior_range;
  require(std::isfinite(B) && B > 0.0,
          "fit_beta_mcmc: beta1 prior range must be > 0");

  const size_t npts = spreads.premium.size();
  require(npts >= static_cast<size_t>(carma_fit.spec.p) + 3,
          "fit_beta_mcmc: spread path too short");
  require(spreads.times.size() == npts, "fit_beta_mcmc: malformed path");
  for (double c : spreads.premium)
    require(std::isfinite(c) && c > 0.0,
            "fit_beta_mcmc: premia must be positive");
  const double h = spreads.times[1] - spreads.times[0];
  require(std::isfinite(h) && h > 0.0, "fit_beta_mcmc: grid spacing must be "
                                       "> 0");

  const carma::CarmaSpec& spec0 = carma_fit.spec;
  const std::pair<double, double> moments0{carma_fit.mean_rate,
                                           carma_fit.variance_rate};

  std::vector<double> z(npts - 1);
  auto log_target = [&](const std::array<double, 3>& beta) -> double {
    const auto [b0, b1, b2] = beta;
    if (!(b0 > 0.0 && b0 < 1.0)) return -kInf;
    if (!(b2 > 0.0 && b2 < 1.0)) return -kInf;
    if (b0 + b2 >= 1.0) return -kInf;
    if (!(b1 <= 0.0 && b1 > -B)) return -kInf;
    try {
      credit::RecoveryParams params =
          credit::RecoveryParams::stochastic(b0, b1, b2);
      double jac = 0.0;
      double prev_lg = 0.0;
      for (size_t k = 0; k < npts; ++k) {
        double g = credit::invert_spread(params, spreads.premium[k]);
        double lg = std::log(g);
        if (k > 0) {
          z[k - 1] = lg - prev_lg;
          // d log gamma / d log C = 1/(1 + kappa): the exact
          // change-of-variables term of the observed log-returns.
          double eb = std::exp(b1 * g);
          double kappa = b0 * (-b1) * g * eb / (1.0 - b2 - b0 * eb);
          jac -= std::log1p(kappa);
        }
        prev_lg = lg;
      }
      return kalman_loglik(spec0, moments0, z, h) + jac;
    } catch (const NumericalError&) {
      return -kInf;
    }
  };

  std::array<double, 3> cur{0.3, -0.5 * B, 0.3};
  double f_cur = log_target(cur);
  for (int attempt = 0; attempt < 100 && !std::isfinite(f_cur); ++attempt) {
    double b0, b2;
    do {
      b0 = rng.uniform();
      b2 = rng.uniform();
    } while (b0 + b2 >= 1.0);
    cur = {b0, -B * rng.uniform(), b2};
    f_cur = log_target(cur);
  }
  if (!std::isfinite(f_cur))
    throw OptimizationFailure(
        "fit_beta_mcmc: could not find a finite-posterior starting point");

  std::array<double, 3> scales{
      mc.scale_beta0 > 0.0 ? mc.scale_beta0 : 0.05,
      mc.scale_beta1 > 0.0 ? mc.scale_beta1 : 0.05 * B,
      mc.scale_beta2 > 0.0 ? mc.scale_beta2 : 0.05};

  McmcResult res;
  res.chain.reserve(static_cast<size_t>(mc.n_samples));
  const int total = mc.burn_in + mc.n_samples;
  int window_accepts = 0, window_count = 0;
  long kept_accepts = 0;
  for (int it = 0; it < total; ++it) {
    std::array<double, 3> prop{cur[0] + scales[0] * rng.normal(),
                               cur[1] + scales[1] * rng.normal(),
                               cur[2] + scales[2] * rng.normal()};
    double f_prop = log_target(prop);
    bool accept =
        std::isfinite(f_prop) && std::log(rng.uniform()) <= f_prop - f_cur;
    if (accept) {
      cur = prop;
      f_cur = f_prop;
    }
    if (it < mc.burn_in) {
      window_accepts += accept ? 1 : 0;
      if (++window_count == 50) {
        double rate = window_accepts / 50.0;
        double factor = std::exp(0.6 * (rate - 0.3));
        for (double& s : scales) s *= factor;
        window_accepts = 0;
        window_count = 0;
      }
    } else {
      kept_accepts += accept ? 1 : 0;
      res.chain.push_back(cur);
    }
  }
  res.acceptance_rate =
      static_cast<double>(kept_accepts) / static_cast<double>(mc.n_samples);

  const double tail = 0.5 * (1.0 - mc.credible_level);
  for (int j = 0; j < 3; ++j) {
    std::vector<double> comp(res.chain.size());
    for (size_t i = 0; i < res.chain.size(); ++i) comp[i] = res.chain[i][static_cast<size_t>(j)];
    res.beta_hat[static_cast<size_t>(j)] =
        std::accumulate(comp.begin(), comp.end(), 0.0) /
        static_cast<double>(comp.size());
    std::sort(comp.begin(), comp.end());
    res.beta_ci[static_cast<size_t>(j)] = {quantile_sorted(comp, tail),
                                           quantile_sorted(comp, 1.0 - tail)};
  }
  return res;
}

double bic(double loglik, int k, int n) {
  require(std::isfinite(loglik), "bic: loglik must be finite");
  require(k >= 1, "bic: k must be >= 1");
  require(n >= 2, "bic: n must be >= 2");
  return -2.0 * loglik + static_cast<double>(k) * std::log(n);
}

nlohmann::json FitReport::to_json() const {
  nlohmann::json j;
  j["model"] = model_name(model);
  j["a"] = a;
  j["b"] = b;
  j["mean_rate"] = mean_rate;
  j["variance_rate"] = variance_rate;
  if (recovery.has_value()) {
    if (recovery->mode() == credit::RecoveryMode::Constant) {
      j["recovery"] = {{"mode", "constant"}, {"R", recovery->R()}};
    } else {
      j["recovery"] = {{"mode", "stochastic"},
                       {"beta0", recovery->beta0()},
                       {"beta1", recovery->beta1()},
                       {"beta2", recovery->beta2()},
                       {"range_warning", recovery->range_warning()}};
    }
  } else {
    j["recovery"] = nullptr;
  }
  if (has_beta_ci) {
    nlohmann::json ci = nlohmann::json::array();
    for (const auto& [lo, hi] : beta_ci) ci.push_back({lo, hi});
    j["beta_ci"] = ci;
  } else {
    j["beta_ci"] = nullptr;
  }
  j["loglik"] = finite_or_null(loglik);
  j["bic"] = finite_or_null(bic_value);
  j["k"] = k_free;
  j["n_obs"] = n_obs;
  j["converged"] = converged;
  j["warnings"] = warnings;
  return j;
}

std::string CompareResult::csv_row(const std::string& entity) const {
  return entity + "," + fmt_g17(srr.bic_value) + "," +
         fmt_g17(crr.bic_value) + "," +
         (preferred == Model::Srr ? "srr" : "crr");
}

CompareResult compare_models(const credit::SpreadPath& spreads,
                             const FitConfig& config, RandomStream& rng) {
  const size_t npts = spreads.premium.size();
  require(npts >= 51, "compare_models: need at least 51 premium points");
  for (double c : spreads.premium)
    require(std::isfinite(c) && c > 0.0,
            "compare_models: premia must be positive");
  const double h = spreads.times.size() >= 2
                       ? spreads.times[1] - spreads.times[0]
                       : 0.0;
  require(std::isfinite(h) && h > 0.0,
          "compare_models: grid spacing must be > 0");

  std::vector<double> returns(npts - 1);
  for (size_t k = 1; k < npts; ++k)
    returns[k - 1] =
        std::log(spreads.premium[k]) - std::log(spreads.premium[k - 1]);
  const int n = static_cast<int>(returns.size());
  const int k_carma = config.p + config.q + 1;

  CompareResult result;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // CRR: premium log-returns fitted directly; the constant R is reported at
  // its configured value and counted as one free parameter.
  CarmaFit crr_fit;
  bool crr_ok = false;
  {
    FitReport& rep = result.crr;
    rep.model = Model::Crr;
    rep.n_obs = n;
    rep.k_free = k_carma + 1;
    try {
      RandomStream sub = rng.substream(101);
      FitConfig crr_config = config;
      crr_config.model = Model::Crr;
      crr_fit = fit_carma(returns, h, crr_config, sub);
      crr_ok = true;
      rep.a.assign(crr_fit.spec.a.data(), crr_fit.spec.a.data() + config.p);
      rep.b.assign(crr_fit.spec.b.data(), crr_fit.spec.b.data() + config.p);
      rep.mean_rate = crr_fit.mean_rate;
      rep.variance_rate = crr_fit.variance_rate;
      rep.recovery = credit::RecoveryParams::constant(config.constant_recovery);
      rep.loglik = crr_fit.loglik;
      rep.bic_value = bic(rep.loglik, rep.k_free, rep.n_obs);
      rep.converged = crr_fit.converged;
      rep.warnings = crr_fit.warnings;
    } catch (const Error& e) {
      rep.converged = false;
      rep.loglik = nan;
      rep.bic_value = nan;
      rep.warnings.push_back(e.what());
    }
  }

  // SRR: beta posterior via MCMC profiled on the CRR-series fit, then a
  // CARMA refit on the implied intensity log-returns at the posterior mean.
  {
    FitReport& rep = result.srr;
    rep.model = Model::Srr;
    rep.n_obs = n;
    rep.k_free = k_carma + 3;
    try {
      if (!crr_ok)
        throw OptimizationFailure(
            "compare_models: stage-one CARMA fit unavailable for the MCMC "
            "profile");
      FitConfig srr_config = config;
      srr_config.model = Model::Srr;
      RandomStream sub_mcmc = rng.substream(102);
      McmcResult mcmc =
          fit_beta_mcmc(spreads, srr_config, crr_fit, sub_mcmc);
      credit::RecoveryParams beta_hat = credit::RecoveryParams::stochastic(
          mcmc.beta_hat[0], mcmc.beta_hat[1], mcmc.beta_hat[2]);

      std::vector<double> zg(npts - 1);
      double prev_lg = 0.0;
      for (size_t k = 0; k < npts; ++k) {
        double lg =
            std::log(credit::invert_spread(beta_hat, spreads.premium[k]));
        if (k > 0) zg[k - 1] = lg - prev_lg;
        prev_lg = lg;
      }
      RandomStream sub_refit = rng.substream(103);
      CarmaFit srr_fit = fit_carma(zg, h, srr_config, sub_refit);

      rep.a.assign(srr_fit.spec.a.data(), srr_fit.spec.a.data() + config.p);
      rep.b.assign(srr_fit.spec.b.data(), srr_fit.spec.b.data() + config.p);
      rep.mean_rate = srr_fit.mean_rate;
      rep.variance_rate = srr_fit.variance_rate;
      rep.recovery = beta_hat;
      rep.beta_ci = mcmc.beta_ci;
      rep.has_beta_ci = true;
      rep.loglik = srr_fit.loglik;
      rep.bic_value = bic(rep.loglik, rep.k_free, rep.n_obs);
      rep.converged = srr_fit.converged;
      rep.warnings = srr_fit.warnings;
      if (beta_hat.range_warning())
        rep.warnings.push_back("recovery parameters flag beta0+beta2 >= 1");
    } catch (const Error& e) {
      rep.converged = false;
      rep.loglik = nan;
      rep.bic_value = nan;
      rep.warnings.push_back(e.what());
    }
  }

  const bool srr_valid = std::isfinite(result.srr.bic_value);
  const bool crr_valid = std::isfinite(result.crr.bic_value);
  if (srr_valid && crr_valid)
    result.preferred =
        result.srr.bic_value < result.crr.bic_value ? Model::Srr : Model::Crr;
  else if (srr_valid)
    result.preferred = Model::Srr;
  else
    result.preferred = Model::Crr;
  return result;
}

}  // namespace carmacds::inference
