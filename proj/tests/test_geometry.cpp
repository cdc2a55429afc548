#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fss/error.hpp"
#include "fss/geometry.hpp"
#include "fss/rng.hpp"

using namespace fss;

namespace {

// Coordinate-level gap between two points. Unlike the arc distance, this
// resolves agreement below the ~1.5e-8 floor of acos near 1.
double point_gap(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_circle()) return std::fabs(wrap_angle(a.angle() - b.angle()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.coords().size(); ++i) {
    const double d = a.coords()[i] - b.coords()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

SpherePoint random_point(int m, RandomStream& rs) {
  if (m == 1) return SpherePoint::circle(rs.uniform(-kPi, kPi));
  std::vector<double> v(static_cast<std::size_t>(m) + 1);
  double n = 0.0;
  do {
    n = 0.0;
    for (auto& x : v) {
      x = rs.normal();
      n += x * x;
    }
    n = std::sqrt(n);
  } while (n < 1e-12);
  for (auto& x : v) x /= n;
  return SpherePoint::embedded_normalized(std::move(v));
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("wrap_angle maps pi to -pi and is periodic") {
  CHECK(wrap_angle(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(-kPi) == -kPi);
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(2.5) == doctest::Approx(2.5));
  CHECK(wrap_angle(2.5 + kTwoPi) == doctest::Approx(2.5));
}

TEST_CASE("geodesic distance on S^2") {
  const auto x = SpherePoint::embedded({1.0, 0.0, 0.0});
  const auto y = SpherePoint::embedded({0.0, 1.0, 0.0});
  CHECK(geodesic_distance(x, x) == 0.0);
  CHECK(geodesic_distance(x, y) == doctest::Approx(kPi / 2).epsilon(1e-14));
}

TEST_CASE("geodesic distance on the circle takes the shorter arc") {
  const auto x = SpherePoint::circle(3.0);
  const auto y = SpherePoint::circle(-3.0);
  CHECK(geodesic_distance(x, y) == doctest::Approx(kTwoPi - 6.0).epsilon(1e-14));
}

TEST_CASE("distance errors on dimension mismatch") {
  const auto x = SpherePoint::circle(0.0);
  const auto y = SpherePoint::north_pole(2);
  CHECK_THROWS_AS(geodesic_distance(x, y), Error);
}

TEST_CASE("circle distance agrees with the embedded arccos formula") {
  RandomStream rs(11, 0);
  for (int i = 0; i < 1000; ++i) {
    const double a = rs.uniform(-kPi, kPi), b = rs.uniform(-kPi, kPi);
    const double direct =
        geodesic_distance(SpherePoint::circle(a), SpherePoint::circle(b));
    const double dot = std::cos(a) * std::cos(b) + std::sin(a) * std::sin(b);
    const double embedded = std::acos(std::clamp(dot, -1.0, 1.0));
    CHECK(direct == doctest::Approx(embedded).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("distance symmetry and triangle inequality") {
  for (const int m : {1, 2, 3, 5}) {
    RandomStream rs(21, static_cast<std::uint64_t>(m));
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_point(m, rs);
      const auto y = random_point(m, rs);
      const auto z = random_point(m, rs);
      const double xy = geodesic_distance(x, y);
      CHECK(xy == geodesic_distance(y, x));
      CHECK(xy >= 0.0);
      CHECK(xy <= kPi + 1e-15);
      CHECK(xy <= geodesic_distance(x, z) + geodesic_distance(z, y) + 1e-12);
    }
  }
}

TEST_CASE("log map basics") {
  const auto base = SpherePoint::north_pole(2);
  const auto v = log_map(base, base);
  CHECK(v.norm() == 0.0);

  // Point at polar coordinates (theta = 0.7, q = (1, 0)) has normal
  // coordinates 0.7 * (1, 0).
  const auto x = polar_compose({0.7, {1.0, 0.0}, false}, 2);
  const auto w = log_map(base, x);
  CHECK(w.norm() == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(w.coords[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(w.coords[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("log map norm equals geodesic distance") {
  for (const int m : {1, 2, 4}) {
    RandomStream rs(31, static_cast<std::uint64_t>(m));
    for (int i = 0; i < 400; ++i) {
      const auto base = random_point(m, rs);
      const auto x = random_point(m, rs);
      if (geodesic_distance(base, x) > kPi - 1e-9) continue;
      CHECK(log_map(base, x).norm() ==
            doctest::Approx(geodesic_distance(base, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("log map errors at the cut locus") {
  const auto base = SpherePoint::north_pole(2);
  const auto anti = SpherePoint::embedded({-1.0, 0.0, 0.0});
  CHECK_THROWS_AS(log_map(base, anti), Error);
  CHECK_THROWS_AS(log_map(SpherePoint::circle(0.3),
                          SpherePoint::circle(0.3 - kPi)),
                  Error);
}

TEST_CASE("exp map basics and error on long vectors") {
  const auto base = SpherePoint::circle(0.0);
  CHECK(exp_map(base, {kPi / 2}).angle() == doctest::Approx(kPi / 2));
  const auto p = SpherePoint::north_pole(3);
  CHECK(geodesic_distance(exp_map(p, {0.0, 0.0, 0.0}), p) == 0.0);
  CHECK_THROWS_AS(exp_map(p, {3.0, 3.0, 3.0}), Error);
}

TEST_CASE("exp/log round trip on 1000 random pairs") {
  for (const int m : {1, 2, 3}) {
    RandomStream rs(41, static_cast<std::uint64_t>(m));
    int done = 0;
    while (done < 1000) {
      const auto base = random_point(m, rs);
      const auto x = random_point(m, rs);
      if (geodesic_distance(base, x) > kPi - 1e-6) continue;
      ++done;
      const auto v = log_map(base, x);
      const auto back = exp_map(v);
      CHECK(point_gap(back, x) < 1e-10);
      // exp then log recovers the tangent vector.
      const auto v2 = log_map(base, back);
      for (std::size_t k = 0; k < v.coords.size(); ++k)
        CHECK(v2.coords[k] == doctest::Approx(v.coords[k]).scale(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("exp map distance equals tangent norm") {
  RandomStream rs(51, 0);
  for (int i = 0; i < 200; ++i) {
    const auto base = random_point(3, rs);
    std::vector<double> coords(3);
    for (auto& c : coords) c = rs.normal();
    double n = std::sqrt(coords[0] * coords[0] + coords[1] * coords[1] +
                         coords[2] * coords[2]);
    const double target = rs.uniform(0.0, kPi - 1e-9);
    for (auto& c : coords) c *= target / n;
    const auto out = exp_map(base, coords);
    CHECK(geodesic_distance(base, out) == doctest::Approx(target).epsilon(1e-10));
  }
}

TEST_CASE("tangent basis is orthonormal and orthogonal to the base") {
  RandomStream rs(61, 0);
  for (const int m : {2, 3, 5}) {
    for (int i = 0; i < 50; ++i) {
      const auto base = random_point(m, rs);
      const auto basis = tangent_basis(base);
      REQUIRE(basis.size() == static_cast<std::size_t>(m));
      for (std::size_t a = 0; a < basis.size(); ++a) {
        CHECK(detail::dot(basis[a], base.coords()) ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        for (std::size_t b = 0; b <= a; ++b)
          CHECK(detail::dot(basis[a], basis[b]) ==
                doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("polar decomposition at the poles is degenerate") {
  const auto p = polar_decompose(SpherePoint::north_pole(3));
  CHECK(p.theta == doctest::Approx(0.0));
  CHECK(p.degenerate);
  CHECK(p.direction[0] == 1.0);
}

TEST_CASE("polar decomposition of an equator point") {
  const auto p = polar_decompose(SpherePoint::embedded({0.0, 1.0, 0.0}));
  CHECK(p.theta == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(p.direction[0] == doctest::Approx(1.0));
  CHECK(p.direction[1] == doctest::Approx(0.0).scale(1.0));
  CHECK_FALSE(p.degenerate);
}

TEST_CASE("polar round trip on 1000 random points") {
  for (const int m : {2, 3, 4}) {
    RandomStream rs(71, static_cast<std::uint64_t>(m));
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_point(m, rs);
      const auto p = polar_decompose(x);
      if (p.degenerate) continue;
      const auto back = polar_compose(p, m);
      CHECK(point_gap(back, x) < 1e-12);
      CHECK(back.coords()[0] == doctest::Approx(std::cos(p.theta)).epsilon(1e-12));
    }
  }
}

TEST_CASE("polar parametrization: distance from the pole equals theta") {
  RandomStream rs(81, 0);
  const auto pole = SpherePoint::north_pole(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> q(3);
    double n = 0.0;
    for (auto& v : q) {
      v = rs.normal();
      n += v * v;
    }
    n = std::sqrt(n);
    for (auto& v : q) v /= n;
    const double theta = rs.uniform(0.0, kPi);
    const auto x = polar_compose({theta, q, false}, 3);
    CHECK(geodesic_distance(pole, x) == doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("chart is invariant under the choice of orthonormal basis") {
  // Quadratic forms of log coordinates are basis-independent; here we check
  // the norm, which is what the statistics rely on.
  RandomStream rs(91, 0);
  for (int i = 0; i < 100; ++i) {
    const auto base = random_point(2, rs);
    const auto x = random_point(2, rs);
    if (geodesic_distance(base, x) > kPi - 1e-9) continue;
    const auto v = log_map(base, x);
    CHECK(v.norm() == doctest::Approx(geodesic_distance(base, x)).epsilon(1e-12));
  }
}

}  // TEST_SUITE
