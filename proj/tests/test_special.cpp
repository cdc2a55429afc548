#include <doctest.h>

#include <cmath>

#include "fss/error.hpp"
#include "fss/geometry.hpp"
#include "fss/quadrature.hpp"
#include "fss/special.hpp"

#include "oracles.hpp"

using namespace fss;

TEST_SUITE("special") {

TEST_CASE("bessel_i0 against the integral representation") {
  for (const double x : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 25.0}) {
    const double oracle = oracles::bessel_i0_quadrature(x);
    CHECK(bessel_i0(x) == doctest::Approx(oracle).epsilon(1e-12));
  }
  CHECK(bessel_i0(0.0) == 1.0);
  // Frozen reference value (30-digit evaluation of the series).
  CHECK(bessel_i0(0.5) == doctest::Approx(1.0634833707413235).epsilon(1e-15));
}

TEST_CASE("chi squared upper tail reference values") {
  // Frozen from the regularized incomplete gamma at 30 digits.
  CHECK(chi_squared_upper_tail(3.841458820694124, 1) ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK(chi_squared_upper_tail(5.991464547107979, 2) ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK(chi_squared_upper_tail(0.0, 3) == 1.0);
  CHECK(chi_squared_upper_tail(-1.0, 3) == 1.0);
}

TEST_CASE("chi squared tail is monotone decreasing in the statistic") {
  for (const int dof : {1, 2, 5}) {
    double prev = 1.0;
    for (double x = 0.0; x < 40.0; x += 0.25) {
      const double p = chi_squared_upper_tail(x, dof);
      CHECK(p <= prev + 1e-15);
      prev = p;
    }
  }
}

TEST_CASE("chi squared tail matches the exponential closed form at dof 2") {
  for (const double x : {0.5, 1.0, 3.0, 10.0})
    CHECK(chi_squared_upper_tail(x, 2) ==
          doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-13));
}

TEST_CASE("sphere surface areas") {
  CHECK(sphere_surface_area(1) == doctest::Approx(kTwoPi).epsilon(1e-14));
  CHECK(sphere_surface_area(2) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(sphere_surface_area(3) ==
        doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
}

TEST_CASE("adaptive simpson on smooth integrands") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, kPi) ==
        doctest::Approx(2.0).epsilon(1e-11));
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const double gauss = integrate(
      [](double x) { return std::exp(-x * x); }, -6.0, 6.0, 1e-12);
  CHECK(gauss == doctest::Approx(std::sqrt(kPi)).epsilon(1e-11));
}

TEST_CASE("adaptive simpson handles a mild kink") {
  const double v = integrate([](double x) { return std::fabs(x - 0.3); },
                             0.0, 1.0, 1e-12);
  CHECK(v == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-10));
}

TEST_CASE("adaptive simpson rejects NaN integrands") {
  CHECK_THROWS_AS(integrate([](double x) { return std::sqrt(x - 0.5); },
                            0.0, 1.0),
                  Error);
}

TEST_CASE("gamma upper argument validation") {
  CHECK_THROWS_AS(regularized_gamma_upper(-1.0, 1.0), Error);
  CHECK_THROWS_AS(regularized_gamma_upper(1.0, -1.0), Error);
}

}  // TEST_SUITE
