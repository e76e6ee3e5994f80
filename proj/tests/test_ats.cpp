#include <doctest.h>

#include <cmath>

#include "carmacds/ats.hpp"
#include "carmacds/carma.hpp"
#include "carmacds/errors.hpp"
#include "carmacds/random.hpp"

using namespace carmacds;
using carma::CarmaSpec;

namespace {

carma::CompanionSystem car1(double a1) {
  return carma::build_system(CarmaSpec::create({a1}, {1.0}));
}

}  // namespace

TEST_SUITE("ats") {

TEST_CASE("tau = 0 gives exactly zero coefficients and unit price") {
  auto sys = car1(6.0);
  auto c = ats::affine_coeffs_closed(sys, 0.0);
  CHECK(c.A_val == 0.0);
  CHECK(c.B_val(0, 0) == 0.0);
  auto o = ats::affine_coeffs_ode(sys, 0.0, 1e-3);
  CHECK(o.A_val == 0.0);
  CHECK(o.B_val(0, 0) == 0.0);
  for (double r : {-0.01, 0.0, 0.08}) {
    auto quote = ats::bond_price(c, r);
    CHECK(quote.price == 1.0);
    CHECK(quote.yield == doctest::Approx(r).epsilon(1e-15));
  }
}

TEST_CASE("CAR(1) a=6 closed-form B at tau=1") {
  auto c = ats::affine_coeffs_closed(car1(6.0), 1.0);
  double want = (1.0 - std::exp(-6.0)) / 6.0;  // ~0.16625
  CHECK(c.B_val(0, 0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(c.B_val(0, 0) == doctest::Approx(0.16625).epsilon(1e-4));
}

TEST_CASE("closed-form A matches the ODE oracle at step 1e-3") {
  auto sys = car1(6.0);
  auto closed = ats::affine_coeffs_closed(sys, 1.0);
  auto ode = ats::affine_coeffs_ode(sys, 1.0, 1e-3);
  CHECK(std::abs(closed.A_val - ode.A_val) < 1e-8);
  CHECK(std::abs(closed.B_val(0, 0) - ode.B_val(0, 0)) < 1e-8);
}

TEST_CASE("closed and ODE coefficients agree on 50 random CAR(1) systems") {
  RandomStream rng(211);
  for (int rep = 0; rep < 50; ++rep) {
    double a1 = 0.1 + 9.9 * rng.uniform();
    double tau = 0.01 + 29.99 * rng.uniform();
    auto sys = car1(a1);
    auto closed = ats::affine_coeffs_closed(sys, tau);
    auto ode = ats::affine_coeffs_ode(sys, tau, ats::default_ode_step(sys, tau));
    CHECK(std::abs(closed.B_val(0, 0) - ode.B_val(0, 0)) < 1e-8);
    CHECK(std::abs(closed.A_val - ode.A_val) < 1e-8);
  }
}

TEST_CASE("ODE scheme shows 4th-order convergence") {
  auto sys = car1(6.0);
  auto closed = ats::affine_coeffs_closed(sys, 1.0);
  double err_h = std::abs(ats::affine_coeffs_ode(sys, 1.0, 0.05).B_val(0, 0) -
                          closed.B_val(0, 0));
  double err_h2 = std::abs(ats::affine_coeffs_ode(sys, 1.0, 0.025).B_val(0, 0) -
                           closed.B_val(0, 0));
  CHECK(err_h2 * 8.0 < err_h);
}

TEST_CASE("ODE step precondition") {
  auto sys = car1(6.0);
  CHECK_THROWS_AS(ats::affine_coeffs_ode(sys, 1.0, 0.2), ArgumentError);
  CHECK_THROWS_AS(ats::affine_coeffs_ode(sys, 1.0, 0.0), ArgumentError);
  CHECK_NOTHROW(ats::affine_coeffs_ode(sys, 1.0, 0.1));
}

TEST_CASE("closed form satisfies the B ODE via finite differences") {
  // dB/d tau = A B + I must hold, i.e. B_t + A B = -1 in the scalar
  // time-to-maturity convention; check |dB/dtau - (A B + 1)| with central FD.
  for (double a1 : {0.5, 2.0, 6.0}) {
    auto sys = car1(a1);
    for (double tau : {0.25, 1.0, 4.0}) {
      const double eps = 1e-5;
      double bp = ats::affine_coeffs_closed(sys, tau + eps).B_val(0, 0);
      double bm = ats::affine_coeffs_closed(sys, tau - eps).B_val(0, 0);
      double b = ats::affine_coeffs_closed(sys, tau).B_val(0, 0);
      double deriv = (bp - bm) / (2.0 * eps);
      CHECK(std::abs(deriv - (-a1 * b + 1.0)) < 1e-5);

      // And dA/dtau = B^2 / 2 for the scalar case.
      double ap = ats::affine_coeffs_closed(sys, tau + eps).A_val;
      double am = ats::affine_coeffs_closed(sys, tau - eps).A_val;
      CHECK(std::abs((ap - am) / (2.0 * eps) - 0.5 * b * b) < 1e-5);
    }
  }
}

TEST_CASE("zero eigenvalue is a singularity error") {
  // z^2 + z = z(z+1) has a root at zero, so A is singular.
  auto sys = carma::build_system(CarmaSpec::create({1.0, 0.0}, {1.0, 0.0}));
  CHECK_THROWS_AS(ats::affine_coeffs_closed(sys, 1.0), SingularityError);
}

TEST_CASE("bond price behaves monotonically and stays positive") {
  auto c = ats::affine_coeffs_closed(car1(6.0), 1.0);
  double prev = 1e300;
  for (double r = -0.05; r <= 0.151; r += 0.01) {
    auto quote = ats::bond_price(c, r);
    CHECK(quote.price > 0.0);
    CHECK(quote.price < prev);
    prev = quote.price;
  }
  auto q0 = ats::bond_price(c, 0.0);
  CHECK(q0.price == doctest::Approx(std::exp(c.A_val)).epsilon(1e-15));
  auto q3 = ats::bond_price(c, 0.03);
  CHECK(q3.price ==
        doctest::Approx(std::exp(c.A_val - c.B_val(0, 0) * 0.03))
            .epsilon(1e-15));
}

TEST_CASE("yield converges to r as tau shrinks") {
  auto sys = car1(6.0);
  auto c = ats::affine_coeffs_closed(sys, 1e-6);
  for (double r : {0.0, 0.03, 0.1}) {
    auto quote = ats::bond_price(c, r);
    CHECK(std::abs(quote.yield - r) < 1e-4);
  }
}

TEST_CASE("p>1 coefficients exist but pricing is rejected") {
  auto sys = carma::build_system(
      CarmaSpec::create({1.39631, 0.05029}, {1.0, 0.0}));
  auto c = ats::affine_coeffs_closed(sys, 1.0);
  CHECK(c.B_val.rows() == 2);
  CHECK(std::isfinite(c.A_val));
  // ODE and closed-form B agree for the matrix case too.
  auto o = ats::affine_coeffs_ode(sys, 1.0, ats::default_ode_step(sys, 1.0));
  CHECK((c.B_val - o.B_val).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(ats::bond_price(c, 0.03), UnsupportedConfigError);
}

}  // TEST_SUITE
