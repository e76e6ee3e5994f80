#include "carmacds/carma.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "carmacds/errors.hpp"

namespace carmacds::carma {

namespace {

constexpr double kRootSeparation = 1e-8;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

// Roots of c_0 + c_1 z + ... + c_n z^n via the companion matrix of the monic
// normalization. Leading zero coefficients are trimmed first.
Eigen::VectorXcd poly_roots(Eigen::VectorXd coeffs) {
  int n = static_cast<int>(coeffs.size()) - 1;
  while (n > 0 && coeffs(n) == 0.0) --n;
  if (n <= 0) return Eigen::VectorXcd(0);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -coeffs(i) / coeffs(n);
  return comp.eigenvalues();
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& m) {
  // Stationary/transition covariances are PSD by construction; shave roundoff
  // by eigenvalue clamping rather than failing on a marginal matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success)
    throw SingularityError("covariance factorization failed");
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * vals.asDiagonal();
}

}  // namespace

CarmaSpec CarmaSpec::create(const std::vector<double>& a,
                            const std::vector<double>& b) {
  CarmaSpec spec;
  spec.p = static_cast<int>(a.size());
  require(spec.p >= 1, "carma: p must be >= 1");
  require(static_cast<int>(b.size()) == spec.p,
          "carma: b must have length p");
  for (double v : a) require(std::isfinite(v), "carma: a must be finite");
  for (double v : b) require(std::isfinite(v), "carma: b must be finite");
  int q = spec.p - 1;
  while (q > 0 && b[static_cast<size_t>(q)] == 0.0) --q;
  require(b[static_cast<size_t>(q)] == 1.0,
          "carma: leading moving-average coefficient b_q must equal 1");
  spec.q = q;
  require(spec.q < spec.p, "carma: q must be < p");
  spec.a = Eigen::Map<const Eigen::VectorXd>(a.data(), spec.p);
  spec.b = Eigen::Map<const Eigen::VectorXd>(b.data(), spec.p);
  return spec;
}

CarmaSpec CarmaSpec::from_free(const std::vector<double>& a,
                               const std::vector<double>& b_free) {
  int p = static_cast<int>(a.size());
  int q = static_cast<int>(b_free.size());
  require(p >= 1 && q < p, "carma: need q < p");
  std::vector<double> b(static_cast<size_t>(p), 0.0);
  for (int j = 0; j < q; ++j) b[static_cast<size_t>(j)] = b_free[static_cast<size_t>(j)];
  b[static_cast<size_t>(q)] = 1.0;
  return create(a, b);
}

CompanionSystem build_system(const CarmaSpec& spec) {
  const int p = spec.p;
  CompanionSystem sys;
  sys.A = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i + 1 < p; ++i) sys.A(i, i + 1) = 1.0;
  for (int j = 0; j < p; ++j) sys.A(p - 1, j) = -spec.a(p - 1 - j);
  sys.e = Eigen::VectorXd::Zero(p);
  sys.e(p - 1) = 1.0;
  sys.eigenvalues = sys.A.eigenvalues();

  if (spec.q >= 1) {
    Eigen::VectorXd bpoly = spec.b.head(spec.q + 1);
    Eigen::VectorXcd ma_roots = poly_roots(bpoly);
    for (int i = 0; i < sys.eigenvalues.size(); ++i)
      for (int j = 0; j < ma_roots.size(); ++j)
        if (std::abs(sys.eigenvalues(i) - ma_roots(j)) < kRootSeparation)
          throw SpecificationError(
              "carma: autoregressive and moving-average polynomials share a "
              "root near " +
              std::to_string(sys.eigenvalues(i).real()));
  }
  return sys;
}

bool is_stationary(const CompanionSystem& sys) {
  for (int i = 0; i < sys.eigenvalues.size(); ++i)
    if (sys.eigenvalues(i).real() >= 0.0) return false;
  return true;
}

double kernel(const CarmaSpec& spec, const CompanionSystem& sys, double u) {
  require(std::isfinite(u) && u >= 0.0, "kernel: u must be >= 0");
  const int p = spec.p;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (std::abs(sys.eigenvalues(i) - sys.eigenvalues(j)) < kRootSeparation)
        throw DegeneracyError(
            "kernel: repeated autoregressive eigenvalues; spectral form "
            "unavailable");

  std::complex<double> acc(0.0, 0.0);
  for (int i = 0; i < p; ++i) {
    std::complex<double> lam = sys.eigenvalues(i);
    std::complex<double> bval(0.0, 0.0);
    for (int j = p - 1; j >= 0; --j) bval = bval * lam + spec.b(j);
    // a'(z) for the monic a(z) = z^p + a_1 z^{p-1} + ... + a_p.
    std::complex<double> aprime(0.0, 0.0);
    for (int j = 0; j < p; ++j) {
      double coef = (j == 0) ? 1.0 : spec.a(j - 1);
      aprime = aprime * lam + coef * static_cast<double>(p - j);
    }
    acc += bval / aprime * std::exp(lam * u);
  }
  return acc.real();
}

double StationaryMoments::acvf(double lag) const {
  Eigen::MatrixXd expA = (A * std::abs(lag)).exp();
  return b.dot(expA * Sigma * b);
}

StationaryMoments stationary_covariance(const CarmaSpec& spec,
                                        const levy::LevyDriver& driver) {
  return stationary_covariance(spec, levy::moment_rates(driver).second);
}

StationaryMoments stationary_covariance(const CarmaSpec& spec,
                                        double vrate) {
  require(std::isfinite(vrate) && vrate >= 0.0,
          "stationary_covariance: variance rate must be >= 0");
  CompanionSystem sys = build_system(spec);
  if (!is_stationary(sys))
    throw StationarityError(
        "stationary_covariance: autoregressive roots must have negative real "
        "parts");
  const int p = spec.p;

  // Vectorized Lyapunov solve: (I (x) A + A (x) I) vec(S) = -vrate vec(ee').
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p * p, p * p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k) {
        K(i + p * j, k + p * j) += sys.A(i, k);  // A S term, column-major vec
        K(i + p * j, i + p * k) += sys.A(j, k);  // S A' term
      }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p * p);
  rhs(p * p - 1) = -vrate;
  Eigen::VectorXd vecS = K.fullPivLu().solve(rhs);
  if (!vecS.allFinite())
    throw SingularityError("stationary_covariance: Lyapunov solve failed");

  StationaryMoments mom;
  mom.Sigma = Eigen::Map<Eigen::MatrixXd>(vecS.data(), p, p);
  mom.Sigma = 0.5 * (mom.Sigma + mom.Sigma.transpose()).eval();
  mom.A = sys.A;
  mom.b = spec.b;
  return mom;
}

DiscreteMoments discrete_moments(const CompanionSystem& sys, double h) {
  require(std::isfinite(h) && h > 0.0, "discrete_moments: h must be > 0");
  const int p = static_cast<int>(sys.A.rows());
  DiscreteMoments dm;

  // Van Loan block for the mean integral.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p + 1, p + 1);
  M.topLeftCorner(p, p) = sys.A;
  M.topRightCorner(p, 1) = sys.e;
  Eigen::MatrixXd expM = (M * h).exp();
  dm.Phi = expM.topLeftCorner(p, p);
  dm.m1 = expM.topRightCorner(p, 1);

  // Van Loan block for the noise covariance.
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(2 * p, 2 * p);
  N.topLeftCorner(p, p) = -sys.A;
  N.topRightCorner(p, p) = sys.e * sys.e.transpose();
  N.bottomRightCorner(p, p) = sys.A.transpose();
  Eigen::MatrixXd expN = (N * h).exp();
  Eigen::MatrixXd F3 = expN.bottomRightCorner(p, p);
  Eigen::MatrixXd G1 = expN.topRightCorner(p, p);
  dm.Q = F3.transpose() * G1;
  dm.Q = 0.5 * (dm.Q + dm.Q.transpose()).eval();
  return dm;
}

StatePath simulate(const CarmaSpec& spec, const levy::LevyDriver& driver,
                   double h, int n_steps,
                   const std::optional<Eigen::VectorXd>& x0,
                   RandomStream& rng) {
  require(std::isfinite(h) && h > 0.0, "simulate: h must be > 0");
  require(n_steps >= 1, "simulate: n_steps must be >= 1");
  CompanionSystem sys = build_system(spec);
  if (!is_stationary(sys))
    throw StationarityError(
        "simulate: autoregressive roots must have negative real parts");
  const int p = spec.p;
  const auto [mean_rate, variance_rate] = levy::moment_rates(driver);

  StatePath path;
  path.times.resize(static_cast<size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k)
    path.times[static_cast<size_t>(k)] = h * k;
  path.states.resize(n_steps + 1, p);
  path.outputs.resize(static_cast<size_t>(n_steps) + 1);

  Eigen::VectorXd x(p);
  if (x0.has_value()) {
    require(x0->size() == p, "simulate: x0 must have length p");
    x = *x0;
  } else if (variance_rate > 0.0) {
    StationaryMoments mom = stationary_covariance(spec, driver);
    Eigen::MatrixXd L = cholesky_factor(mom.Sigma);
    Eigen::VectorXd z(p);
    for (int i = 0; i < p; ++i) z(i) = rng.normal();
    x = L * z;
  } else {
    x = Eigen::VectorXd::Zero(p);
  }

  DiscreteMoments dm = discrete_moments(sys, h);
  const bool exact_jumps =
      driver.kind() == levy::DriverKind::CompoundPoissonNormal;
  Eigen::MatrixXd L;
  if (!exact_jumps && variance_rate > 0.0)
    L = cholesky_factor(variance_rate * dm.Q);

  path.states.row(0) = x.transpose();
  path.outputs[0] = spec.b.dot(x);
  for (int k = 1; k <= n_steps; ++k) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
    if (exact_jumps) {
      levy::JumpRecord jumps = levy::sample_jumps(driver, h, rng);
      for (size_t j = 0; j < jumps.times.size(); ++j) {
        Eigen::MatrixXd expAt = (sys.A * (h - jumps.times[j])).exp();
        z += jumps.sizes[j] * (expAt * sys.e);
      }
    } else if (variance_rate > 0.0) {
      Eigen::VectorXd g(p);
      for (int i = 0; i < p; ++i) g(i) = rng.normal();
      z = mean_rate * dm.m1 + L * g;
    } else {
      z = mean_rate * dm.m1;
    }
    x = dm.Phi * x + z;
    path.states.row(k) = x.transpose();
    path.outputs[static_cast<size_t>(k)] = spec.b.dot(x);
  }
  return path;
}

double integrated_output(const StatePath& path, double from, double to) {
  require(path.times.size() >= 2, "integrated_output: path too short");
  const double t0 = path.times.front();
  const double t1 = path.times.back();
  const double tol = 1e-9 * (t1 - t0);
  require(from >= t0 - tol && to <= t1 + tol && from <= to,
          "integrated_output: [from,to] must lie within the path span");
  from = std::clamp(from, t0, t1);
  to = std::clamp(to, t0, t1);

  auto value_at = [&](double t, size_t hint_lo) -> double {
    size_t i = hint_lo;
    while (i + 2 < path.times.size() && path.times[i + 1] <= t) ++i;
    double w = (t - path.times[i]) / (path.times[i + 1] - path.times[i]);
    return (1.0 - w) * path.outputs[i] + w * path.outputs[i + 1];
  };

  size_t lo = 0;
  while (lo + 2 < path.times.size() && path.times[lo + 1] <= from) ++lo;
  size_t hi = lo;
  while (hi + 2 < path.times.size() && path.times[hi + 1] <= to) ++hi;

  if (lo == hi) {
    double fa = value_at(from, lo);
    double fb = value_at(to, lo);
    return 0.5 * (fa + fb) * (to - from);
  }
  double acc = 0.5 * (value_at(from, lo) + path.outputs[lo + 1]) *
               (path.times[lo + 1] - from);
  for (size_t k = lo + 1; k < hi; ++k)
    acc += 0.5 * (path.outputs[k] + path.outputs[k + 1]) *
           (path.times[k + 1] - path.times[k]);
  acc += 0.5 * (path.outputs[hi] + value_at(to, hi)) * (to - path.times[hi]);
  return acc;
}

}  // namespace carmacds::carma
