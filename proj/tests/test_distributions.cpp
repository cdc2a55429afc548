#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fss/distributions.hpp"
#include "fss/error.hpp"
#include "fss/geometry.hpp"
#include "fss/quadrature.hpp"
#include "fss/special.hpp"

#include "oracles.hpp"

using namespace fss;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() -
                              static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_SUITE("distributions") {

TEST_CASE("spec JSON round trip") {
  const std::vector<std::string> specs = {
      R"({"type":"von_mises","mu":0.0,"kappa":0.5})",
      R"({"type":"conditioned_von_mises","mu":0.0,"kappa":0.5,"support":[[-2.9416,2.9416]]})",
      R"({"type":"two_point","a":-0.7854,"b":0.7854,"w":0.5})",
      R"({"type":"vmf","m":2,"kappa":1.0})",
      R"({"type":"ring_mixture","m":4,"theta":2.0,"alpha":0.3})",
      R"({"type":"rot_sym","m":2,"atoms":[[1.5708,1.0]]})",
  };
  for (const auto& text : specs) {
    const auto spec = spec_from_json(text);
    const auto again = spec_from_json(spec_to_json(spec));
    CHECK(spec_to_json(again) == spec_to_json(spec));
  }
}

TEST_CASE("spec JSON rejects malformed input") {
  CHECK_THROWS_AS(spec_from_json("not json"), Error);
  CHECK_THROWS_AS(spec_from_json(R"({"type":"nope"})"), Error);
  CHECK_THROWS_AS(spec_from_json(R"({"type":"von_mises","mu":0.0})"), Error);
  CHECK_THROWS_AS(spec_from_json(R"({"type":"vmf","m":1,"kappa":1.0})"), Error);
  CHECK_THROWS_AS(
      spec_from_json(R"({"type":"ring_mixture","m":2,"theta":0.0,"alpha":0.3})"),
      Error);
  CHECK_THROWS_AS(
      spec_from_json(R"({"type":"rot_sym","m":2,"atoms":[[1.0,0.5]]})"),
      Error);  // mass 0.5, not 1
}

TEST_CASE("sampling is deterministic in (seed, stream)") {
  const DistributionSpec spec = VonMisesCircle{0.3, 1.5};
  const auto a = sample(spec, 64, 7, 3);
  const auto b = sample(spec, 64, 7, 3);
  const auto c = sample(spec, 64, 7, 4);
  for (long i = 0; i < 64; ++i) CHECK(a.angle(i) == b.angle(i));
  long diff = 0;
  for (long i = 0; i < 64; ++i) diff += a.angle(i) != c.angle(i);
  CHECK(diff > 32);
}

TEST_CASE("two point frequencies obey the law of large numbers") {
  const DistributionSpec spec = TwoPointCircle{-kPi / 4, kPi / 4, 0.5};
  const auto s = sample(spec, 10000, 1, 0);
  long count_a = 0;
  for (long i = 0; i < s.size(); ++i)
    if (std::fabs(s.angle(i) + kPi / 4) < 1e-15) ++count_a;
  const double freq = static_cast<double>(count_a) / 1e4;
  CHECK(freq > 0.48);
  CHECK(freq < 0.52);
}

TEST_CASE("uniform vMF has a near-zero mean vector") {
  const DistributionSpec spec = VonMisesFisher{2, 0.0};
  const auto s = sample(spec, 10000, 2, 0);
  std::vector<double> mean(3, 0.0);
  for (long i = 0; i < s.size(); ++i) {
    const auto v = s.vec(i);
    for (std::size_t k = 0; k < 3; ++k) mean[k] += v[k];
  }
  double norm = 0.0;
  for (double& v : mean) {
    v /= 1e4;
    norm += v * v;
  }
  CHECK(std::sqrt(norm) <= 0.05);
}

TEST_CASE("von Mises sample histogram matches the density") {
  const DistributionSpec spec = VonMisesCircle{0.0, 0.5};
  const long n = 1000000;
  const auto s = sample(spec, n, 3, 0);
  const int bins = 64;
  std::vector<long> counts(bins, 0);
  for (long i = 0; i < n; ++i) {
    int b = static_cast<int>((s.angle(i) + kPi) / kTwoPi * bins);
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double w = kTwoPi / bins;
  for (int b = 0; b < bins; ++b) {
    const double center = -kPi + (b + 0.5) * w;
    const double f = density(spec, SpherePoint::circle(center));
    const double p = f * w;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n)) / w;
    const double empirical =
        static_cast<double>(counts[static_cast<std::size_t>(b)]) /
        (static_cast<double>(n) * w);
    CHECK(std::fabs(empirical - f) <= 3.0 * se + 1e-4);
  }
}

TEST_CASE("densities integrate to one") {
  const auto vm = DistributionSpec{VonMisesCircle{0.3, 1.2}};
  CHECK(integrate([&](double x) { return density(vm, SpherePoint::circle(x)); },
                  -kPi, kPi, 1e-12) == doctest::Approx(1.0).epsilon(1e-8));

  const auto cond = DistributionSpec{
      ConditionedVonMises{0.0, 0.5, {{-kPi + 0.2, kPi - 0.2}}}};
  CHECK(integrate(
            [&](double x) { return density(cond, SpherePoint::circle(x)); },
            -kPi + 0.2, kPi - 0.2, 1e-12) == doctest::Approx(1.0).epsilon(1e-8));

  for (const int m : {2, 3}) {
    const auto vmf = DistributionSpec{VonMisesFisher{m, 1.0}};
    const double mass = integrate(
        [&](double t) {
          PolarPoint p;
          p.theta = t;
          p.direction.assign(static_cast<std::size_t>(m), 0.0);
          p.direction[0] = 1.0;
          const auto x = polar_compose(p, m);
          return density(vmf, x) * sphere_surface_area(m - 1) *
                 std::pow(std::sin(t), m - 1);
        },
        0.0, kPi, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("density values") {
  CHECK(density(DistributionSpec{VonMisesCircle{0.0, 0.0}},
                SpherePoint::circle(1.234)) ==
        doctest::Approx(1.0 / kTwoPi).epsilon(1e-14));
  const double kappa = 0.7;
  CHECK(density(DistributionSpec{VonMisesCircle{0.0, kappa}},
                SpherePoint::circle(-kPi)) ==
        doctest::Approx(std::exp(-kappa) / (kTwoPi * bessel_i0(kappa)))
            .epsilon(1e-13));
  CHECK(density(DistributionSpec{
                    ConditionedVonMises{0.0, 0.5, {{-kPi + 0.2, kPi - 0.2}}}},
                SpherePoint::circle(-kPi)) == 0.0);
  CHECK_THROWS_AS(density(DistributionSpec{TwoPointCircle{0.0, 1.0, 0.5}},
                          SpherePoint::circle(0.0)),
                  Error);
  CHECK_THROWS_AS(density(DistributionSpec{RingMixture{2, 1.0, 0.5}},
                          SpherePoint::north_pole(2)),
                  Error);
}

TEST_CASE("antipodal density") {
  // Oracle: normalize the von Mises kernel by quadrature instead of I0.
  const double kappa = 0.5;
  const double z = oracles::romberg(
      [kappa](double x) { return std::exp(kappa * std::cos(x)); }, -kPi, kPi);
  const double oracle = std::exp(-kappa) / z;
  const double got =
      antipodal_density(DistributionSpec{VonMisesCircle{0.0, kappa}});
  CHECK(got == doctest::Approx(oracle).epsilon(1e-11));
  CHECK(got == doctest::Approx(0.09076996903370853).epsilon(1e-12));

  CHECK(antipodal_density(DistributionSpec{
            ConditionedVonMises{0.0, 0.5, {{-kPi + 0.2, kPi - 0.2}}}}) == 0.0);
  CHECK(antipodal_density(DistributionSpec{VonMisesCircle{0.0, 0.0}}) ==
        doctest::Approx(1.0 / kTwoPi).epsilon(1e-14));
  CHECK_THROWS_AS(antipodal_density(DistributionSpec{VonMisesFisher{2, 1.0}}),
                  Error);
  // Atom sitting at the antipode of the mean breaks continuity.
  CHECK_THROWS_AS(
      antipodal_density(DistributionSpec{TwoPointCircle{-kPi / 2, kPi / 2, 0.5}}),
      Error);
}

TEST_CASE("conditioned sampling stays in the support and can exhaust") {
  const ConditionedVonMises cond{0.0, 0.5,
                                 {{-1.0, -0.5}, {0.25, 0.5}, {2.0, 2.5}}};
  const auto s = sample(DistributionSpec{cond}, 2000, 5, 0);
  for (long i = 0; i < s.size(); ++i) {
    const double a = s.angle(i);
    const bool inside = (a >= -1.0 - 1e-12 && a <= -0.5 + 1e-12) ||
                        (a >= 0.25 - 1e-12 && a <= 0.5 + 1e-12) ||
                        (a >= 2.0 - 1e-12 && a <= 2.5 + 1e-12);
    CHECK(inside);
  }
  // Far tail with huge concentration: effectively zero support mass.
  const ConditionedVonMises empty{0.0, 60.0, {{kPi - 0.01, kPi - 0.001}}};
  CHECK_THROWS_AS(Sampler(DistributionSpec{empty}), Error);
}

TEST_CASE("ring mixture draws land exactly on the ring or the pole") {
  const RingMixture ring{3, 2.0, 0.3};
  const auto s = sample(DistributionSpec{ring}, 4000, 6, 0);
  long on_ring = 0;
  for (long i = 0; i < s.size(); ++i) {
    const auto v = s.vec(i);
    if (v[0] == 1.0) continue;  // the pole atom
    ++on_ring;
    CHECK(std::fabs(v[0] - std::cos(2.0)) < 1e-12);
  }
  const double freq = static_cast<double>(on_ring) / 4000.0;
  const double se = std::sqrt(0.3 * 0.7 / 4000.0);
  CHECK(std::fabs(freq - 0.3) <= 3.0 * se);
}

TEST_CASE("sampling is rotation equivariant in distribution") {
  // Rotating the center and rotating the draws commute: compare KS on
  // angles between vM(delta) draws and vM(0) draws shifted by delta.
  const double delta = 1.1;
  const auto a = sample(DistributionSpec{VonMisesCircle{delta, 1.0}}, 10000, 8, 0);
  const auto b = sample(DistributionSpec{VonMisesCircle{0.0, 1.0}}, 10000, 9, 0);
  std::vector<double> rotated(10000);
  for (long i = 0; i < 10000; ++i)
    rotated[static_cast<std::size_t>(i)] = wrap_angle(b.angle(i) + delta);
  const double d = ks_two_sample(a.angles(), rotated);
  // KS critical value at level 0.01 for two samples of 1e4.
  CHECK(d < 1.628 * std::sqrt(2.0 / 10000.0));
}

TEST_CASE("rot_sym polar angles follow the mixing measure") {
  // Triangle density on [0.5, 2.5], atoms at 0.4 and 2.8.
  MixingMeasure mix;
  mix.atoms = {{0.4, 0.2}, {2.8, 0.1}};
  mix.density_theta = {0.5, 1.5, 2.5};
  mix.density_value = {0.0, 0.7, 0.0};
  const RotSym spec{2, mix};
  validate_spec(DistributionSpec{spec});

  const long n = 20000;
  const auto s = sample(DistributionSpec{spec}, n, 10, 0);
  long at_a = 0, at_b = 0;
  std::vector<double> continuous;
  std::vector<double> dir_mean(2, 0.0);
  for (long i = 0; i < n; ++i) {
    const auto p = polar_decompose(s.point(i));
    if (std::fabs(p.theta - 0.4) < 1e-9) {
      ++at_a;
    } else if (std::fabs(p.theta - 2.8) < 1e-9) {
      ++at_b;
    } else {
      continuous.push_back(p.theta);
    }
    if (!p.degenerate)
      for (std::size_t k = 0; k < 2; ++k) dir_mean[k] += p.direction[k];
  }
  const double fa = static_cast<double>(at_a) / n;
  const double fb = static_cast<double>(at_b) / n;
  CHECK(std::fabs(fa - 0.2) <= 3.0 * std::sqrt(0.2 * 0.8 / n));
  CHECK(std::fabs(fb - 0.1) <= 3.0 * std::sqrt(0.1 * 0.9 / n));

  // KS of the continuous part against the triangle CDF.
  const auto cdf = [](double t) {
    auto dens = [](double x) {
      if (x < 0.5 || x > 2.5) return 0.0;
      return x <= 1.5 ? 0.7 * (x - 0.5) : 0.7 * (2.5 - x);
    };
    return oracles::romberg(dens, 0.5, std::min(t, 2.5)) / 0.7;
  };
  const double d = oracles::ks_statistic(continuous, cdf);
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(continuous.size())));

  // Directions are uniform on S^1: coordinate means near zero.
  for (const double v : dir_mean)
    CHECK(std::fabs(v / static_cast<double>(n)) <=
          3.0 / std::sqrt(2.0 * static_cast<double>(n)));
}

TEST_CASE("vMF polar angle law matches the analytic profile") {
  const int m = 2;
  const double kappa = 1.0;
  const auto s = sample(DistributionSpec{VonMisesFisher{m, kappa}}, 10000, 11, 0);
  std::vector<double> thetas;
  for (long i = 0; i < s.size(); ++i)
    thetas.push_back(polar_decompose(s.point(i)).theta);
  const double z = oracles::romberg(
      [&](double t) { return std::exp(kappa * std::cos(t)) * std::sin(t); },
      0.0, kPi);
  const auto cdf = [&](double t) {
    return oracles::romberg(
               [&](double u) {
                 return std::exp(kappa * std::cos(u)) * std::sin(u);
               },
               0.0, std::clamp(t, 0.0, kPi)) /
           z;
  };
  const double d = oracles::ks_statistic(thetas, cdf);
  CHECK(d < 1.628 / std::sqrt(1e4));

  // Mean resultant length on S^2: coth(kappa) - 1/kappa.
  double mean_x0 = 0.0;
  for (long i = 0; i < s.size(); ++i) mean_x0 += s.vec(i)[0];
  mean_x0 /= 1e4;
  const double expected = 1.0 / std::tanh(kappa) - 1.0 / kappa;
  CHECK(std::fabs(mean_x0 - expected) < 3.0 * 0.6 / std::sqrt(1e4));
}

TEST_CASE("population mean and variance: atomic specs") {
  const auto tp = population_mean_and_variance(
      DistributionSpec{TwoPointCircle{-kPi / 4, kPi / 4, 0.5}});
  CHECK(tp.mean.angle() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(tp.variance == doctest::Approx(kPi * kPi / 16).epsilon(1e-12));
  CHECK(tp.unique_global);

  const auto ring = population_mean_and_variance(
      DistributionSpec{RingMixture{3, 2.0, 0.4}});
  CHECK(geodesic_distance(ring.mean, SpherePoint::north_pole(3)) == 0.0);
  CHECK(ring.variance == doctest::Approx(0.4 * 4.0).epsilon(1e-10));
}

TEST_CASE("population variance of vM(0, 0.5) against Monte Carlo") {
  const DistributionSpec spec = VonMisesCircle{0.0, 0.5};
  const auto pop = population_mean_and_variance(spec);
  CHECK(pop.mean.angle() == 0.0);
  // Frozen 30-digit quadrature value.
  CHECK(pop.variance == doctest::Approx(2.3488033436687469).epsilon(1e-9));

  const long n = 10000000;
  const auto s = sample(spec, n, 12, 0);
  double acc = 0.0, acc2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double d2 = s.angle(i) * s.angle(i);
    acc += d2;
    acc2 += d2 * d2;
  }
  const double mc = acc / static_cast<double>(n);
  const double var_d2 = acc2 / static_cast<double>(n) - mc * mc;
  const double se = std::sqrt(var_d2 / static_cast<double>(n));
  CHECK(std::fabs(pop.variance - mc) <= 3.0 * se);
}

TEST_CASE("population rejects non-unique or off-center means") {
  // Uniform circle: every point minimizes.
  CHECK_THROWS_AS(
      population_mean_and_variance(DistributionSpec{VonMisesCircle{0.0, 0.0}}),
      Error);
  // Antipodal equal-mass atoms: two minimizers.
  CHECK_THROWS_AS(population_mean_and_variance(
                      DistributionSpec{TwoPointCircle{0.0, -kPi, 0.5}}),
                  Error);
  // Support concentrated at the antipode: center is a maximum.
  CHECK_THROWS_AS(
      population_mean_and_variance(DistributionSpec{ConditionedVonMises{
          0.0, 0.5, {{-kPi, -kPi + 0.1}, {kPi - 0.1, kPi}}}}),
      Error);
  // Uniform sphere: no strict local minimum at the center.
  CHECK_THROWS_AS(
      population_mean_and_variance(DistributionSpec{VonMisesFisher{2, 0.0}}),
      Error);
}

TEST_CASE("population flags tied global minimizers on the sphere") {
  // Equator ring: both poles minimize; the center stays a strict local
  // minimum and the summary reports the tie.
  const auto eq = population_mean_and_variance(
      DistributionSpec{RingMixture{2, kPi / 2, 1.0}});
  CHECK_FALSE(eq.unique_global);
  CHECK(eq.variance == doctest::Approx(kPi * kPi / 4).epsilon(1e-12));

  const auto low = population_mean_and_variance(
      DistributionSpec{RingMixture{2, 1.0, 0.5}});
  CHECK(low.unique_global);

  const auto vmf = population_mean_and_variance(
      DistributionSpec{VonMisesFisher{2, 1.0}});
  CHECK(vmf.unique_global);
  CHECK(vmf.variance == doctest::Approx(1.83954866727).epsilon(1e-8));
}

}  // TEST_SUITE
