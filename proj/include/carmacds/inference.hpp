#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "carmacds/carma.hpp"
#include "carmacds/credit.hpp"
#include "carmacds/levy.hpp"
#include "carmacds/random.hpp"

namespace carmacds::inference {

enum class Model { Crr, Srr };

struct OptimizerConfig {
  int max_iters = 2000;
  double gradient_tolerance = 1e-3;
  // Stationarity-preserving bounds on -Re(root) during optimization.
  double root_min = 1e-2;
  double root_max = 50.0;
  int n_starts = 10;
};

struct McmcConfig {
  int n_samples = 4000;  // kept draws after burn-in
  int burn_in = 1000;
  // Random-walk proposal scales; scale_beta1 <= 0 means 0.05 * prior range.
  double scale_beta0 = 0.05;
  double scale_beta1 = -1.0;
  double scale_beta2 = 0.05;
  double credible_level = 0.95;
  double beta1_prior_range = 10.0;  // B in beta1 ~ Uniform(-B, 0]
};

struct FitConfig {
  int p = 1;
  int q = 0;
  levy::DriverKind driver_kind = levy::DriverKind::Brownian;
  Model model = Model::Srr;
  OptimizerConfig optimizer;
  McmcConfig mcmc;
  double constant_recovery = 0.4;  // CRR recovery point value
};

// Gaussian quasi-likelihood of point observations Y_k = b'X_k under the
// exactly discretized transition, stationary initialization, observation
// noise 0 with a 1e-10 jitter on the predicted observation variance.
double kalman_loglik(const carma::CarmaSpec& spec,
                     std::pair<double, double> driver_moments,
                     const std::vector<double>& y, double h);

struct CarmaFit {
  carma::CarmaSpec spec;
  double mean_rate = 0.0;  // fixed at 0 for log-return series
  double variance_rate = 0.0;
  double loglik = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// QMLE by simplex search over (roots as -exp(u), free b, log variance_rate)
// from n_starts random stationary starting points.
CarmaFit fit_carma(const std::vector<double>& y, double h,
                   const FitConfig& config, RandomStream& rng);

struct McmcResult {
  std::array<double, 3> beta_hat{};  // posterior means (beta0, beta1, beta2)
  std::array<std::pair<double, double>, 3> beta_ci{};
  std::vector<std::array<double, 3>> chain;  // post burn-in states
  double acceptance_rate = 0.0;
};

// Random-walk Metropolis over (beta0, beta1, beta2) with uniform priors
// restricted to beta0 + beta2 < 1. Each proposal inverts the premia to
// intensities, forms their log-returns, and evaluates the profile
// quasi-likelihood (CARMA parameters held at carma_fit) plus the exact
// log-return change-of-variables term. Proposal scales adapt toward a
// 0.2-0.4 acceptance rate during burn-in only.
McmcResult fit_beta_mcmc(const credit::SpreadPath& spreads,
                         const FitConfig& config, const CarmaFit& carma_fit,
                         RandomStream& rng);

double bic(double loglik, int k, int n);

struct FitReport {
  Model model = Model::Crr;
  std::vector<double> a;
  std::vector<double> b;
  double mean_rate = 0.0;
  double variance_rate = 0.0;
  std::optional<credit::RecoveryParams> recovery;  // point estimate
  std::array<std::pair<double, double>, 3> beta_ci{};
  bool has_beta_ci = false;
  double loglik = 0.0;
  double bic_value = 0.0;
  int k_free = 0;
  int n_obs = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct CompareResult {
  FitReport srr;
  FitReport crr;
  Model preferred = Model::Crr;

  // Table row: entity, bic_srr, bic_crr, preferred.
  std::string csv_row(const std::string& entity) const;
};

// Fits both recovery models on one premium series. CRR fits the premium
// log-returns directly; SRR runs the beta MCMC, then refits the CARMA on the
// implied intensity log-returns at the posterior mean. k counts CARMA
// coefficients + driver variance + recovery parameters (1 or 3). A failed
// branch yields converged=false instead of aborting.
CompareResult compare_models(const credit::SpreadPath& spreads,
                             const FitConfig& config, RandomStream& rng);

}  // namespace carmacds::inference
