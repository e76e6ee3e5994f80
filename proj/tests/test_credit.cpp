#include <doctest.h>

#include <cmath>
#include <vector>

#include "carmacds/carma.hpp"
#include "carmacds/credit.hpp"
#include "carmacds/errors.hpp"
#include "carmacds/levy.hpp"
#include "carmacds/random.hpp"
#include "oracles.hpp"

using namespace carmacds;
using carma::CarmaSpec;
using credit::RecoveryParams;

namespace {

credit::IntensityPath constant_path(double gamma, double h, int n) {
  credit::IntensityPath p;
  for (int k = 0; k <= n; ++k) {
    p.times.push_back(h * k);
    p.gamma.push_back(gamma);
  }
  return p;
}

}  // namespace

TEST_SUITE("credit") {

TEST_CASE("recovery parameter validation and range flag") {
  CHECK_THROWS_AS(RecoveryParams::constant(0.0), ArgumentError);
  CHECK_THROWS_AS(RecoveryParams::constant(1.0), ArgumentError);
  CHECK_THROWS_AS(RecoveryParams::stochastic(0.0, -1.0, 0.5), ArgumentError);
  CHECK_THROWS_AS(RecoveryParams::stochastic(0.5, 0.5, 0.5), ArgumentError);
  CHECK_THROWS_AS(RecoveryParams::stochastic(0.5, -1.0, 1.0), ArgumentError);

  auto ok = RecoveryParams::stochastic(0.0378, -0.0095, 0.637);
  CHECK_FALSE(ok.range_warning());
  // beta0 + beta2 > 1: construction succeeds but carries the flag.
  auto flagged = RecoveryParams::stochastic(0.378, -0.0095, 0.637);
  CHECK(flagged.range_warning());
}

TEST_CASE("recovery_rate closed forms") {
  auto c = RecoveryParams::constant(0.4);
  CHECK(credit::recovery_rate(c, 0.001) == 0.4);
  CHECK(credit::recovery_rate(c, 100.0) == 0.4);

  auto s = RecoveryParams::stochastic(0.0378, -0.0095, 0.637);
  double want = 0.637 + 0.0378 * std::exp(-0.0095);
  CHECK(credit::recovery_rate(s, 1.0) ==
        doctest::Approx(want).epsilon(1e-12));
  CHECK(credit::recovery_rate(s, 1.0) ==
        doctest::Approx(0.67444).epsilon(1e-4));
  // gamma -> infinity approaches beta2 from above, monotonically.
  double prev = credit::recovery_rate(s, 0.5);
  for (double g : {1.0, 5.0, 50.0, 500.0, 5000.0}) {
    double r = credit::recovery_rate(s, g);
    CHECK(r <= prev);
    CHECK(r >= 0.637);
    prev = r;
  }
  CHECK(credit::recovery_rate(s, 1e7) ==
        doctest::Approx(0.637).epsilon(1e-9));
}

TEST_CASE("credit triangle values") {
  CHECK(credit::credit_triangle_spread(RecoveryParams::constant(0.4), 0.02) ==
        doctest::Approx(0.012).epsilon(1e-12));

  auto s = RecoveryParams::stochastic(0.0378, -0.0095, 0.637);
  double exact = (1.0 - 0.637 - 0.0378 * std::exp(-0.0095 * 0.02)) * 0.02;
  CHECK(credit::credit_triangle_spread(s, 0.02) ==
        doctest::Approx(exact).epsilon(1e-9));
  CHECK(credit::credit_triangle_spread(s, 0.02) ==
        doctest::Approx(0.0065044).epsilon(1e-4));

  // Constant(R) equals the degenerate stochastic embedding exactly.
  auto embed = RecoveryParams::stochastic(1e-300, 0.0, 0.4);
  for (double g : {0.001, 0.02, 1.0, 10.0})
    CHECK(credit::credit_triangle_spread(RecoveryParams::constant(0.4), g) ==
          doctest::Approx(credit::credit_triangle_spread(embed, g))
              .epsilon(1e-12));

  CHECK_THROWS_AS(credit::credit_triangle_spread(s, 0.0), ArgumentError);
}

TEST_CASE("invert_spread round-trips and stays monotone") {
  auto c = RecoveryParams::constant(0.4);
  CHECK(credit::invert_spread(c, 0.012) ==
        doctest::Approx(0.02).epsilon(1e-12));

  auto s = RecoveryParams::stochastic(0.0378, -0.0095, 0.637);
  double spread = credit::credit_triangle_spread(s, 0.02);
  CHECK(std::abs(credit::invert_spread(s, spread) - 0.02) < 1e-10 * 0.02);

  // invert o triangle = identity across nine orders of magnitude.
  for (double g = 1e-6; g <= 10.0; g *= 10.0) {
    double sp = credit::credit_triangle_spread(s, g);
    CHECK(std::abs(credit::invert_spread(s, sp) - g) < 1e-10 * g);
    double back = credit::credit_triangle_spread(s, credit::invert_spread(s, sp));
    CHECK(std::abs(back - sp) < 1e-10 * sp);
  }

  double prev = 0.0;
  for (double sp : {0.001, 0.005, 0.01, 0.05, 0.1}) {
    double g = credit::invert_spread(s, sp);
    CHECK(g > prev);
    prev = g;
  }

  CHECK_THROWS_AS(credit::invert_spread(s, 0.0), ArgumentError);
  auto flagged = RecoveryParams::stochastic(0.378, -0.0095, 0.637);
  CHECK_THROWS_AS(credit::invert_spread(flagged, 0.01),
                  NonInvertibleParamsError);
}

TEST_CASE("generate_spread_path with a silent driver is constant") {
  auto spec = CarmaSpec::create({6.0}, {1.0});
  auto driver = levy::LevyDriver::compound_poisson_normal(0.0, 0.0, 1.0);
  RandomStream rng(301);
  auto paths = credit::generate_spread_path(
      spec, driver, RecoveryParams::constant(0.4), 0.01, 1.0, 20, rng);
  // x0 is drawn from the stationary law, but vr = 0 collapses it to 0.
  for (double c : paths.spread.premium)
    CHECK(c == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("spread log-returns equal integrated output exactly") {
  auto spec = CarmaSpec::create({1.39631, 0.05029}, {2.0, 1.0});
  auto driver = levy::LevyDriver::brownian(0.0, 0.2);
  RandomStream rng(307);
  auto paths = credit::generate_spread_path(
      spec, driver, RecoveryParams::constant(0.4), 0.01, 0.5, 100, rng);
  for (size_t k = 1; k < paths.spread.premium.size(); ++k) {
    double lr = std::log(paths.spread.premium[k]) -
                std::log(paths.spread.premium[k - 1]);
    double want = carma::integrated_output(paths.state,
                                           paths.state.times[k - 1],
                                           paths.state.times[k]);
    CHECK(lr == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("same Y path: spreads agree across recovery modes, gammas differ") {
  auto spec = CarmaSpec::create({6.0}, {1.0});
  auto driver = levy::LevyDriver::brownian(0.0, 0.5);
  RandomStream r1(311), r2(311);
  auto pc = credit::generate_spread_path(
      spec, driver, RecoveryParams::constant(0.4), 0.01, 1.0, 50, r1);
  auto ps = credit::generate_spread_path(
      spec, driver, RecoveryParams::stochastic(0.0378, -0.0095, 0.637), 0.01,
      1.0, 50, r2);
  double max_gamma_gap = 0.0;
  for (size_t k = 0; k < pc.spread.premium.size(); ++k) {
    CHECK(pc.spread.premium[k] ==
          doctest::Approx(ps.spread.premium[k]).epsilon(1e-14));
    max_gamma_gap = std::max(
        max_gamma_gap, std::abs(pc.intensity.gamma[k] - ps.intensity.gamma[k]));
  }
  CHECK(max_gamma_gap > 1e-6);
}

TEST_CASE("default times for constant intensity are exponential") {
  RandomStream rng(313);
  auto path = constant_path(0.1, 0.25, 800);  // horizon 200 >> mean 10
  const int n = 100000;
  std::vector<double> taus;
  taus.reserve(n);
  int censored = 0;
  for (int i = 0; i < n; ++i) {
    auto t = credit::simulate_default_time(path, rng);
    if (t)
      taus.push_back(*t);
    else
      ++censored;
  }
  // P(no default before 200) = e^{-20}: essentially never.
  CHECK(censored == 0);
  CHECK(std::abs(oracle::mean_of(taus) - 10.0) < 0.1);
  double d = oracle::ks_statistic(
      taus, [](double t) { return 1.0 - std::exp(-0.1 * t); });
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("zero intensity never defaults") {
  credit::IntensityPath p;
  for (int k = 0; k <= 10; ++k) {
    p.times.push_back(static_cast<double>(k));
    p.gamma.push_back(0.0);
  }
  RandomStream rng(317);
  for (int i = 0; i < 100; ++i)
    CHECK_FALSE(credit::simulate_default_time(p, rng).has_value());
}

TEST_CASE("survival curve for a time-varying intensity matches exp(-int)") {
  // gamma(t) = 0.05 + 0.04 sin(t): cumulative hazard has a closed form.
  credit::IntensityPath p;
  const double h = 0.01;
  const int n = 4000;  // horizon 40
  for (int k = 0; k <= n; ++k) {
    double t = h * k;
    p.times.push_back(t);
    p.gamma.push_back(0.05 + 0.04 * std::sin(t));
  }
  auto hazard = [](double t) { return 0.05 * t + 0.04 * (1.0 - std::cos(t)); };
  RandomStream rng(331);
  const int reps = 30000;
  std::vector<double> taus;
  for (int i = 0; i < reps; ++i) {
    auto t = credit::simulate_default_time(p, rng);
    if (t) taus.push_back(*t);
  }
  // Condition on default before the horizon.
  double p_def = 1.0 - std::exp(-hazard(h * n));
  double d = oracle::ks_statistic(taus, [&](double t) {
    return (1.0 - std::exp(-hazard(t))) / p_def;
  });
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(taus.size())));
}

TEST_CASE("fair spread reduces to the credit triangle on constant paths") {
  credit::DiscountCurve curve{0.03};
  auto path = constant_path(0.05, 0.05, 100);  // [0,5]
  std::vector<credit::IntensityPath> ens{path};

  double fs = credit::fair_spread(ens, RecoveryParams::constant(0.4), curve,
                                  0.0, 5.0);
  CHECK(std::abs(fs - 0.03) < 1e-6);
  CHECK(std::abs(fs - 0.6 * 0.05) < 1e-10);

  auto s = RecoveryParams::stochastic(0.0378, -0.0095, 0.637);
  double fss = credit::fair_spread(ens, s, curve, 0.0, 5.0);
  double want = credit::credit_triangle_spread(s, 0.05);
  CHECK(std::abs(fss - want) < 1e-10);
}

TEST_CASE("fair spread is r-invariant for constant intensity") {
  auto path = constant_path(0.02, 0.05, 100);
  std::vector<credit::IntensityPath> ens{path};
  auto params = RecoveryParams::constant(0.4);
  double base = credit::fair_spread(ens, params, credit::DiscountCurve{0.0},
                                    0.0, 5.0);
  for (double r : {0.03, 0.1}) {
    double fs = credit::fair_spread(ens, params, credit::DiscountCurve{r},
                                    0.0, 5.0);
    CHECK(std::abs(fs - base) < 1e-9);
  }
}

TEST_CASE("fair spread error is O(h^2) in the grid step") {
  // Non-constant intensity so the quadrature error is visible.
  auto build = [](double h, int n) {
    credit::IntensityPath p;
    for (int k = 0; k <= n; ++k) {
      double t = h * k;
      p.times.push_back(t);
      p.gamma.push_back(0.04 + 0.02 * std::sin(1.7 * t));
    }
    return p;
  };
  auto params = RecoveryParams::constant(0.4);
  credit::DiscountCurve curve{0.03};
  std::vector<credit::IntensityPath> coarse{build(0.1, 50)};
  std::vector<credit::IntensityPath> mid{build(0.05, 100)};
  std::vector<credit::IntensityPath> fine{build(0.0125, 400)};
  double f_coarse = credit::fair_spread(coarse, params, curve, 0.0, 5.0);
  double f_mid = credit::fair_spread(mid, params, curve, 0.0, 5.0);
  double f_fine = credit::fair_spread(fine, params, curve, 0.0, 5.0);
  // With O(h^2) error, the 0.1 -> 0.05 step change should be about 4x the
  // remaining distance to the near-exact 0.0125 value.
  double jump1 = std::abs(f_coarse - f_fine);
  double jump2 = std::abs(f_mid - f_fine);
  CHECK(jump2 < jump1 / 2.5);
  CHECK(jump1 < 1e-4);
}

TEST_CASE("fair spread input validation") {
  auto params = RecoveryParams::constant(0.4);
  credit::DiscountCurve curve{0.03};
  std::vector<credit::IntensityPath> empty;
  CHECK_THROWS_AS(credit::fair_spread(empty, params, curve, 0.0, 5.0),
                  ArgumentError);
  // Path not covering [s, s+tenor].
  std::vector<credit::IntensityPath> shorty{constant_path(0.05, 0.05, 10)};
  CHECK_THROWS_AS(credit::fair_spread(shorty, params, curve, 0.0, 5.0),
                  ArgumentError);
}

TEST_CASE("monte carlo standard error shrinks with ensemble size") {
  auto spec = CarmaSpec::create({6.0}, {1.0});
  auto driver = levy::LevyDriver::brownian(0.0, 0.3);
  auto params = RecoveryParams::constant(0.4);
  credit::DiscountCurve curve{0.03};
  RandomStream rng(337);
  auto make_ens = [&](int m) {
    std::vector<credit::IntensityPath> ens;
    for (int i = 0; i < m; ++i) {
      RandomStream sub = rng.substream(static_cast<std::uint64_t>(i));
      ens.push_back(credit::generate_spread_path(spec, driver, params, 0.01,
                                                 0.05, 100, sub)
                        .intensity);
    }
    return ens;
  };
  auto small = credit::fair_spread_mc(make_ens(100), params, curve, 0.0, 5.0);
  auto large = credit::fair_spread_mc(make_ens(400), params, curve, 0.0, 5.0);
  CHECK(small.std_error > 0.0);
  // 4x the paths should halve the SE, within statistical slack.
  double ratio = small.std_error / large.std_error;
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.9);
}

TEST_CASE("recovery monotonicity in gamma for stochastic mode") {
  auto s = RecoveryParams::stochastic(0.3, -2.0, 0.5);
  double prev = 2.0;
  for (double g = 0.01; g < 100.0; g *= 3.0) {
    double r = credit::recovery_rate(s, g);
    CHECK(r <= prev);
    prev = r;
  }
}

}  // TEST_SUITE
