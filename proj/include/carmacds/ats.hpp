#pragma once

#include <Eigen/Dense>

#include "carmacds/carma.hpp"

namespace carmacds::ats {

// Bond exponent coefficients over the horizon tau = T - t. B_val is p x p
// (1 x 1 when p = 1); A_val is the scalar intercept.
struct AffineCoeffs {
  double A_val = 0.0;
  Eigen::MatrixXd B_val;
  double tau = 0.0;
};

struct BondQuote {
  double price = 1.0;
  double yield = 0.0;
};

// Closed form B = A^{-1} (exp(A tau) - I). The intercept is exact for p = 1;
// for p > 1 it is delegated to the ODE integrator at the default step since
// the closed matrix expression is order-ambiguous.
AffineCoeffs affine_coeffs_closed(const carma::CompanionSystem& sys,
                                  double tau);

// Fixed-step 4th-order integration of dB/dtau = A B + I, dA/dtau = B B / 2
// from zero initial values. Requires step <= tau/10 (or tau = 0).
AffineCoeffs affine_coeffs_ode(const carma::CompanionSystem& sys, double tau,
                               double step);

// Step that keeps the integrator's global error well under the 1e-8 oracle
// tolerance: min(tau/1000, 0.02/spectral_radius(A)).
double default_ode_step(const carma::CompanionSystem& sys, double tau);

// price = exp(A_val - B r), scalar short-rate model only (p = 1).
BondQuote bond_price(const AffineCoeffs& coeffs, double r);

}  // namespace carmacds::ats
