#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fss/distributions.hpp"
#include "fss/error.hpp"
#include "fss/frechet.hpp"
#include "fss/testing.hpp"

#include "oracles.hpp"

using namespace fss;

namespace {

Sample rotate_circle(const Sample& s, double delta) {
  std::vector<double> a = s.angles();
  for (double& v : a) v = wrap_angle(v + delta);
  return Sample::circle(std::move(a));
}

Sample rotate_s2(const Sample& s, double delta) {
  const double c = std::cos(delta), sn = std::sin(delta);
  std::vector<double> flat(s.raw().begin(), s.raw().end());
  for (long i = 0; i < s.size(); ++i) {
    double& x0 = flat[static_cast<std::size_t>(i) * 3];
    double& x1 = flat[static_cast<std::size_t>(i) * 3 + 1];
    const double r0 = c * x0 - sn * x1, r1 = sn * x0 + c * x1;
    x0 = r0;
    x1 = r1;
  }
  return Sample::embedded(2, std::move(flat));
}

}  // namespace

TEST_SUITE("testing") {

TEST_CASE("one sample test: symmetric sample gives statistic 0") {
  const auto r = one_sample_quantile_test(Sample::circle({-0.5, 0.5}),
                                          SpherePoint::circle(0.0));
  CHECK(r.statistic == doctest::Approx(0.0).scale(1.0).epsilon(1e-20));
  CHECK(r.p_value == 1.0);
  CHECK(r.dof == 1);
}

TEST_CASE("one sample test reduces to the scalar formula on the circle") {
  const auto s = sample(DistributionSpec{VonMisesCircle{0.0, 2.0}}, 50, 31, 0);
  const auto mu0 = SpherePoint::circle(0.1);
  const auto r = one_sample_quantile_test(s, mu0);

  const auto mean = frechet_mean(s);
  const double phi = wrap_angle(mean.mean.angle() - 0.1);
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < s.size(); ++i) {
    const double z = wrap_angle(s.angle(i) - 0.1);
    sum += z;
    sum2 += z * z;
  }
  const double n = static_cast<double>(s.size());
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(r.statistic == doctest::Approx(n * phi * phi / var).epsilon(1e-12));
}

TEST_CASE("one sample calibration: mild versus severe finite sample bias") {
  // The chi-squared approximation inherits the modulation of the law: at
  // kappa = 2 the inflation is mild (limit 1.13), at kappa = 0.5 severe
  // (limit 5.42). Thresholds frozen from a 10^4-replicate calibration run.
  const long R = 10000, n = 200;
  double ks[2] = {0.0, 0.0};
  const double kappas[2] = {2.0, 0.5};
  for (int k = 0; k < 2; ++k) {
    const Sampler sampler(DistributionSpec{VonMisesCircle{0.0, kappas[k]}});
    std::vector<double> ps;
    ps.reserve(static_cast<std::size_t>(R));
    for (long r = 0; r < R; ++r) {
      const auto s = sampler.draw_n(n, 424242, static_cast<std::uint64_t>(r));
      ps.push_back(
          one_sample_quantile_test(s, SpherePoint::circle(0.0)).p_value);
    }
    ks[k] = oracles::ks_statistic(ps, [](double p) {
              return std::clamp(p, 0.0, 1.0);
            }) *
            std::sqrt(static_cast<double>(R));
  }
  CHECK(ks[0] < 5.0);    // kappa = 2: near-uniform p-values
  CHECK(ks[1] > 15.0);   // kappa = 0.5: strongly anti-conservative
  CHECK(ks[1] > 5.0 * ks[0]);
}

TEST_CASE("two sample quantile test: identical samples") {
  const auto s = sample(DistributionSpec{VonMisesCircle{0.2, 1.0}}, 40, 33, 0);
  const auto r = two_sample_quantile_test(s, s);
  CHECK(r.statistic == doctest::Approx(0.0).scale(1.0).epsilon(1e-18));
  CHECK(r.p_value == 1.0);
}

TEST_CASE("two sample tests are rotation invariant") {
  const auto a = sample(DistributionSpec{VonMisesCircle{0.0, 0.8}}, 45, 35, 0);
  const auto b = sample(DistributionSpec{VonMisesCircle{0.4, 0.8}}, 55, 35, 1);
  const double t0 = two_sample_quantile_test(a, b).statistic;
  for (const double delta : {0.7, -2.1}) {
    const double t = two_sample_quantile_test(rotate_circle(a, delta),
                                              rotate_circle(b, delta))
                         .statistic;
    CHECK(t == doctest::Approx(t0).epsilon(1e-10));
  }

  const auto sa = sample(DistributionSpec{VonMisesFisher{2, 2.0}}, 40, 37, 0);
  const auto sb = sample(DistributionSpec{VonMisesFisher{2, 2.0}}, 40, 37, 1);
  const double q0 = two_sample_quantile_test(sa, sb).statistic;
  const double q1 =
      two_sample_quantile_test(rotate_s2(sa, 1.3), rotate_s2(sb, 1.3)).statistic;
  CHECK(q1 == doctest::Approx(q0).epsilon(1e-9));

  const double b0 = two_sample_bootstrap_test(sa, sb, 300, 5).statistic;
  const double b1 =
      two_sample_bootstrap_test(rotate_s2(sa, 1.3), rotate_s2(sb, 1.3), 300, 5)
          .statistic;
  CHECK(b1 == doctest::Approx(b0).epsilon(1e-9));
}

TEST_CASE("bootstrap test: identical samples and argument checks") {
  const auto s = sample(DistributionSpec{VonMisesCircle{0.0, 1.0}}, 30, 39, 0);
  const auto r = two_sample_bootstrap_test(s, s, 200, 1);
  CHECK(r.statistic == doctest::Approx(0.0).scale(1.0).epsilon(1e-18));
  CHECK(r.p_value == 1.0);
  CHECK(r.bootstrap_count == 200);
  CHECK_THROWS_AS(two_sample_bootstrap_test(s, s, 50, 1), Error);
}

TEST_CASE("bootstrap covariance approaches the quantile covariance in the "
          "Euclidean regime") {
  // Supports inside a quarter circle: the circular mean is the arithmetic
  // mean, so the n-out-of-n bootstrap covariance converges to Sigma/n.
  RandomStream rs(41, 0);
  std::vector<double> a1(200), a2(200);
  for (auto& v : a1) v = rs.uniform(0.0, kPi / 2);
  for (auto& v : a2) v = rs.uniform(0.3, kPi / 2 + 0.3);
  const auto s1 = Sample::circle(a1);
  const auto s2 = Sample::circle(a2);
  const double tq = two_sample_quantile_test(s1, s2).statistic;
  const double tb = two_sample_bootstrap_test(s1, s2, 20000, 3).statistic;
  CHECK(std::fabs(tb / tq - 1.0) < 0.05);
}

TEST_CASE("quantile test over-rejects under strong finite sample smeariness") {
  const DistributionSpec spec = VonMisesCircle{0.0, 0.5};
  const auto rows = rejection_curve(spec, {0.0}, 50, 600, 0.05,
                                    TestMethod::quantile, 0, 51);
  REQUIRE(rows.size() == 1);
  const double binom_se = std::sqrt(0.05 * 0.95 / 600.0);
  CHECK(rows[0].rate > 0.05 + 3.0 * binom_se);
}

TEST_CASE("rejection curve: bootstrap holds the level, beats quantile at 0") {
  const DistributionSpec spec = VonMisesCircle{0.0, 0.5};
  const auto q = rejection_curve(spec, {0.0}, 50, 400, 0.05,
                                 TestMethod::quantile, 0, 53);
  const auto b = rejection_curve(spec, {0.0}, 50, 400, 0.05,
                                 TestMethod::bootstrap, 300, 53);
  CHECK(b[0].rate < q[0].rate);
  CHECK(b[0].rate < 0.12);
}

TEST_CASE("rejection curve: power grows with the offset") {
  const DistributionSpec spec = VonMisesCircle{0.0, 2.0};
  const auto rows = rejection_curve(spec, {0.0, 0.4, 0.8, 1.4}, 50, 400, 0.05,
                                    TestMethod::quantile, 0, 55);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double joint_se =
        std::sqrt(rows[i].se * rows[i].se + rows[i + 1].se * rows[i + 1].se);
    CHECK(rows[i + 1].rate >= rows[i].rate - 3.0 * joint_se);
  }
  CHECK(rows.back().rate > 0.9);
}

TEST_CASE("rejection curve determinism across thread counts") {
  const DistributionSpec spec = VonMisesCircle{0.0, 1.0};
  const auto a = rejection_curve(spec, {0.0, 0.5}, 30, 200, 0.05,
                                 TestMethod::quantile, 0, 57, 1);
  const auto b = rejection_curve(spec, {0.0, 0.5}, 30, 200, 0.05,
                                 TestMethod::quantile, 0, 57, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rejections == b[i].rejections);
    CHECK(a[i].rate == b[i].rate);
  }
}

TEST_CASE("sphere two-sample tests run end to end") {
  const auto a = sample(DistributionSpec{VonMisesFisher{2, 1.0}}, 60, 61, 0);
  const auto b = sample(DistributionSpec{VonMisesFisher{2, 1.0}}, 60, 61, 1);
  const auto q = two_sample_quantile_test(a, b);
  CHECK(q.dof == 2);
  CHECK(q.p_value >= 0.0);
  CHECK(q.p_value <= 1.0);
  const auto bt = two_sample_bootstrap_test(a, b, 200, 7);
  CHECK(bt.dof == 2);
  CHECK(bt.p_value >= 0.0);
  CHECK(bt.p_value <= 1.0);
}

TEST_CASE("argument validation") {
  const auto s = sample(DistributionSpec{VonMisesCircle{0.0, 1.0}}, 30, 63, 0);
  const auto t = sample(DistributionSpec{VonMisesFisher{2, 1.0}}, 30, 63, 1);
  CHECK_THROWS_AS(two_sample_quantile_test(s, t), Error);
  CHECK_THROWS_AS(one_sample_quantile_test(Sample::circle({0.1}),
                                           SpherePoint::circle(0.0)),
                  Error);
  CHECK_THROWS_AS(rejection_curve(DistributionSpec{VonMisesCircle{0.0, 1.0}},
                                  {}, 30, 200, 0.05, TestMethod::quantile, 0,
                                  1),
                  Error);
  CHECK_THROWS_AS(rejection_curve(DistributionSpec{VonMisesCircle{0.0, 1.0}},
                                  {0.0}, 30, 200, 1.5, TestMethod::quantile, 0,
                                  1),
                  Error);
}

}  // TEST_SUITE
