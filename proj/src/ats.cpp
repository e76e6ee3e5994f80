#include "carmacds/ats.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "carmacds/errors.hpp"

namespace carmacds::ats {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

void check_invertible(const carma::CompanionSystem& sys) {
  for (int i = 0; i < sys.eigenvalues.size(); ++i)
    if (std::abs(sys.eigenvalues(i)) < 1e-14)
      throw SingularityError(
          "affine_coeffs: companion matrix has a zero eigenvalue");
}

}  // namespace

AffineCoeffs affine_coeffs_closed(const carma::CompanionSystem& sys,
                                  double tau) {
  require(std::isfinite(tau) && tau >= 0.0,
          "affine_coeffs_closed: tau must be >= 0");
  const int p = static_cast<int>(sys.A.rows());
  AffineCoeffs out;
  out.tau = tau;
  out.B_val = Eigen::MatrixXd::Zero(p, p);
  if (tau == 0.0) return out;
  check_invertible(sys);

  Eigen::MatrixXd expA = (sys.A * tau).exp();
  Eigen::MatrixXd rhs = expA - Eigen::MatrixXd::Identity(p, p);
  out.B_val = sys.A.fullPivLu().solve(rhs);

  if (p == 1) {
    const double A = sys.A(0, 0);
    const double B = out.B_val(0, 0);
    out.A_val = (A * B * B - 2.0 * B + 2.0 * tau) / (4.0 * A * A);
  } else {
    out.A_val = affine_coeffs_ode(sys, tau, default_ode_step(sys, tau)).A_val;
  }
  return out;
}

AffineCoeffs affine_coeffs_ode(const carma::CompanionSystem& sys, double tau,
                               double step) {
  require(std::isfinite(tau) && tau >= 0.0,
          "affine_coeffs_ode: tau must be >= 0");
  const int p = static_cast<int>(sys.A.rows());
  AffineCoeffs out;
  out.tau = tau;
  out.B_val = Eigen::MatrixXd::Zero(p, p);
  if (tau == 0.0) return out;
  require(std::isfinite(step) && step > 0.0,
          "affine_coeffs_ode: step must be > 0");
  require(step <= tau / 10.0, "affine_coeffs_ode: step must be <= tau/10");

  const int n = static_cast<int>(std::ceil(tau / step - 1e-12));
  const double dt = tau / n;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
  const Eigen::MatrixXd& A = sys.A;

  auto fB = [&](const Eigen::MatrixXd& B) -> Eigen::MatrixXd {
    return A * B + I;
  };
  auto fA = [](const Eigen::MatrixXd& B) -> Eigen::MatrixXd {
    return 0.5 * B * B;
  };

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd Amat = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXd kb1 = fB(B);
    Eigen::MatrixXd ka1 = fA(B);
    Eigen::MatrixXd kb2 = fB(B + 0.5 * dt * kb1);
    Eigen::MatrixXd ka2 = fA(B + 0.5 * dt * kb1);
    Eigen::MatrixXd kb3 = fB(B + 0.5 * dt * kb2);
    Eigen::MatrixXd ka3 = fA(B + 0.5 * dt * kb2);
    Eigen::MatrixXd kb4 = fB(B + dt * kb3);
    Eigen::MatrixXd ka4 = fA(B + dt * kb3);
    Amat += dt / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
    B += dt / 6.0 * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4);
  }
  out.B_val = B;
  out.A_val = sys.e.dot(Amat * sys.e);
  return out;
}

double default_ode_step(const carma::CompanionSystem& sys, double tau) {
  require(std::isfinite(tau) && tau > 0.0,
          "default_ode_step: tau must be > 0");
  double rho = 0.0;
  for (int i = 0; i < sys.eigenvalues.size(); ++i)
    rho = std::max(rho, std::abs(sys.eigenvalues(i)));
  double step = tau / 1000.0;
  if (rho > 0.0) step = std::min(step, 0.02 / rho);
  return step;
}

BondQuote bond_price(const AffineCoeffs& coeffs, double r) {
  require(std::isfinite(r), "bond_price: r must be finite");
  if (coeffs.B_val.rows() != 1)
    throw UnsupportedConfigError(
        "bond_price: pricing is defined for the scalar short-rate model "
        "(p = 1) only");
  BondQuote quote;
  quote.price = std::exp(coeffs.A_val - coeffs.B_val(0, 0) * r);
  quote.yield =
      coeffs.tau > 0.0 ? -std::log(quote.price) / coeffs.tau : r;
  return quote;
}

}  // namespace carmacds::ats
