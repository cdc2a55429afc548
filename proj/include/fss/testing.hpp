#ifndef FSS_TESTING_HPP
#define FSS_TESTING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fss/distributions.hpp"
#include "fss/frechet.hpp"

namespace fss {

enum class TestMethod { quantile, bootstrap };

std::string test_method_name(TestMethod method);
TestMethod test_method_from_name(const std::string& name);

struct TestReport {
  TestMethod method = TestMethod::quantile;
  double statistic = 0.0;
  int dof = 1;
  double p_value = 1.0;
  long n1 = 0;
  long n2 = 0;
  long bootstrap_count = 0;  // 0 for the quantile test
  std::uint64_t seed = 0;
};

// Chi-squared test of H0: the Frechet mean equals mu0, from the CLT
// approximation n phi(mean_n)^T Sigma_n^{-1} phi(mean_n) -> chi^2_m in the
// chart at mu0.
TestReport one_sample_quantile_test(const Sample& sample,
                                    const SpherePoint& mu0);

// Chi-squared test of equal Frechet means in the chart at the pooled mean,
// studentized by the per-sample empirical tangent covariances.
TestReport two_sample_quantile_test(const Sample& s1, const Sample& s2);

// Same null hypothesis, but studentized by covariances of B resampled
// Frechet means per sample, which absorb the finite-sample inflation of the
// mean dispersion.
TestReport two_sample_bootstrap_test(const Sample& s1, const Sample& s2,
                                     long B, std::uint64_t seed,
                                     int threads = 1);

struct RejectionRow {
  double offset = 0.0;
  TestMethod method = TestMethod::quantile;
  long n = 0;
  double level = 0.0;
  long rejections = 0;
  long replicates = 0;
  double rate = 0.0;
  double se = 0.0;
};

// Empirical rejection rates for pairs (sample, rotated sample) drawn from
// base_spec, one row per offset. Deterministic for fixed seed and any thread
// count.
std::vector<RejectionRow> rejection_curve(const DistributionSpec& base_spec,
                                          const std::vector<double>& offsets,
                                          long n, long replicates, double level,
                                          TestMethod method, long B,
                                          std::uint64_t seed, int threads = 1);

}  // namespace fss

#endif
