#pragma once

#include <optional>
#include <vector>

#include "carmacds/carma.hpp"
#include "carmacds/levy.hpp"
#include "carmacds/random.hpp"

namespace carmacds::credit {

enum class RecoveryMode { Constant, Stochastic };

// Recovery map. Constant: R. Stochastic: R(g) = beta2 + beta0 exp(beta1 g).
// beta0 + beta2 >= 1 is constructible but flagged (recovery can leave (0,1));
// values are never clamped so likelihood code can reject such parameters.
class RecoveryParams {
 public:
  static RecoveryParams constant(double R);
  static RecoveryParams stochastic(double beta0, double beta1, double beta2);

  RecoveryMode mode() const { return mode_; }
  bool range_warning() const { return range_warning_; }
  double R() const;
  double beta0() const;
  double beta1() const;
  double beta2() const;

 private:
  RecoveryMode mode_;
  double r_ = 0.0;
  double b0_ = 0.0, b1_ = 0.0, b2_ = 0.0;
  bool range_warning_ = false;
};

struct IntensityPath {
  std::vector<double> times;
  std::vector<double> gamma;
};

struct SpreadPath {
  std::vector<double> times;
  std::vector<double> premium;
  double tenor = 5.0;
};

// Deterministic flat discounting D_s^t = exp(-r (t-s)).
struct DiscountCurve {
  double short_rate = 0.0;
};

double recovery_rate(const RecoveryParams& params, double gamma);

// Flat-spread identity C = (1 - R(gamma)) gamma.
double credit_triangle_spread(const RecoveryParams& params, double gamma);

// Unique gamma with credit_triangle_spread(params, gamma) = spread, by
// bisection to relative tolerance 1e-12. Stochastic mode needs
// beta0 + beta2 < 1 for strict monotonicity.
double invert_spread(const RecoveryParams& params, double spread);

struct GeneratedPaths {
  SpreadPath spread;
  IntensityPath intensity;
  carma::StatePath state;
};

// Spread path as the primitive: log C increments are the trapezoid-integrated
// CARMA output per step, gamma implied by inverting the credit triangle so
// the flat-spread identity holds exactly at every grid point.
GeneratedPaths generate_spread_path(const carma::CarmaSpec& spec,
                                    const levy::LevyDriver& driver,
                                    const RecoveryParams& params, double c0,
                                    double h, int n_steps, RandomStream& rng,
                                    double tenor = 5.0);

// Intensity as the primitive: log gamma increments are h * Y_k (the
// stochastic-recovery model's own observation law), premium from the credit
// triangle. This is the sampler for recovery-parameter studies, where the
// observed premia must actually carry the recovery signal.
GeneratedPaths generate_intensity_model_path(const carma::CarmaSpec& spec,
                                             const levy::LevyDriver& driver,
                                             const RecoveryParams& params,
                                             double gamma0, double h,
                                             int n_steps, RandomStream& rng,
                                             double tenor = 5.0);

// Inverse-transform default time: first t with trapezoidal integrated
// intensity >= Exp(1) draw, linearly interpolated within the step; empty when
// the path's mass is exhausted first.
std::optional<double> simulate_default_time(const IntensityPath& gamma_path,
                                            RandomStream& rng);

struct FairSpreadResult {
  double value = 0.0;
  double std_error = 0.0;  // delta-method Monte Carlo error of the ratio
};

// Intensity-based fair spread: ratio of ensemble means of the trapezoid
// protection and premium legs over [s, s+tenor].
FairSpreadResult fair_spread_mc(const std::vector<IntensityPath>& gamma_paths,
                                const RecoveryParams& params,
                                const DiscountCurve& curve, double s,
                                double tenor);

double fair_spread(const std::vector<IntensityPath>& gamma_paths,
                   const RecoveryParams& params, const DiscountCurve& curve,
                   double s, double tenor);

}  // namespace carmacds::credit
