#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "carmacds/levy.hpp"
#include "carmacds/random.hpp"

namespace carmacds::carma {

// Continuous-time ARMA(p,q) specification. a holds (a_1..a_p); b holds
// (b_0..b_{p-1}) with b_q = 1 and b_j = 0 for j > q.
struct CarmaSpec {
  int p = 0;
  int q = 0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;

  // Validates orders and the b normalization.
  static CarmaSpec create(const std::vector<double>& a,
                          const std::vector<double>& b);
  // Builds the full b vector from the q free coefficients (b_0..b_{q-1}).
  static CarmaSpec from_free(const std::vector<double>& a,
                             const std::vector<double>& b_free);
};

// State-space form dX = AX dt + e dL, Y = b'X.
struct CompanionSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd e;
  Eigen::VectorXcd eigenvalues;
};

// Raises the specification error when the AR and MA polynomials share a root
// (pairwise distance < 1e-8).
CompanionSystem build_system(const CarmaSpec& spec);

bool is_stationary(const CompanionSystem& sys);

// Kernel g(u) = sum_i b(l_i)/a'(l_i) exp(l_i u) over the eigenvalues l_i.
// Requires u >= 0 and distinct eigenvalues (degeneracy error otherwise).
double kernel(const CarmaSpec& spec, const CompanionSystem& sys, double u);

struct StationaryMoments {
  Eigen::MatrixXd Sigma;  // stationary state covariance
  // Output autocovariance b' exp(A |lag|) Sigma b.
  double acvf(double lag) const;

  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

// Requires stationarity. Sigma solves A S + S A' = -variance_rate e e'.
StationaryMoments stationary_covariance(const CarmaSpec& spec,
                                        const levy::LevyDriver& driver);
StationaryMoments stationary_covariance(const CarmaSpec& spec,
                                        double variance_rate);

// Exact one-step transition structure at spacing h (unit variance rate):
// Phi = exp(Ah), m1 = int_0^h exp(Au) e du, Q = int_0^h exp(Au) e e' exp(A'u) du.
struct DiscreteMoments {
  Eigen::MatrixXd Phi;
  Eigen::VectorXd m1;
  Eigen::MatrixXd Q;
};
DiscreteMoments discrete_moments(const CompanionSystem& sys, double h);

struct StatePath {
  std::vector<double> times;    // n_steps + 1 points, t_k = k h
  Eigen::MatrixXd states;       // (n_steps + 1) x p
  std::vector<double> outputs;  // Y_k = b' X_k
};

// Exact-in-distribution simulation on the grid. x0 empty = stationary start
// (mean zero, covariance Sigma). Compound Poisson states are exact given the
// jumps; Brownian/NIG transitions are Gaussian with matched first two moments.
StatePath simulate(const CarmaSpec& spec, const levy::LevyDriver& driver,
                   double h, int n_steps,
                   const std::optional<Eigen::VectorXd>& x0, RandomStream& rng);

// Trapezoid integral of the output over [from, to] within the path span.
double integrated_output(const StatePath& path, double from, double to);

}  // namespace carmacds::carma
