#include "fss/testing.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fss/error.hpp"
#include "fss/parallel.hpp"
#include "fss/special.hpp"

namespace fss {

namespace {

// Inverse of a symmetric positive semidefinite matrix via eigendecomposition,
// with eigenvalues floored at 1e-12 * trace. Exactly singular input errors.
Eigen::MatrixXd invert_psd(const Eigen::MatrixXd& a, const char* what) {
  const double tr = a.trace();
  if (!(tr > 0.0)) fail_numeric(std::string(what) + ": singular covariance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const double floor = 1e-12 * tr;
  Eigen::VectorXd inv = es.eigenvalues();
  for (long i = 0; i < inv.size(); ++i) {
    if (inv[i] <= 0.0)
      fail_numeric(std::string(what) + ": singular covariance");
    inv[i] = 1.0 / std::max(inv[i], floor);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd chart_coords(const SpherePoint& base, const SpherePoint& x) {
  const auto v = log_map(base, x);
  return Eigen::Map<const Eigen::VectorXd>(v.coords.data(),
                                           static_cast<long>(v.coords.size()));
}

Sample concatenate(const Sample& s1, const Sample& s2) {
  std::vector<double> flat(s1.raw().begin(), s1.raw().end());
  flat.insert(flat.end(), s2.raw().begin(), s2.raw().end());
  if (s1.dim() == 1) return Sample::circle(std::move(flat));
  return Sample::embedded(s1.dim(), std::move(flat));
}

// Bootstrap Frechet means of a sample; replicate b resamples with the
// substream (seed, stream_base + b).
std::vector<SpherePoint> bootstrap_means(const Sample& sample, long B,
                                         std::uint64_t seed,
                                         std::uint64_t stream_base,
                                         int threads) {
  const long n = sample.size();
  const std::size_t w = sample.row_len();
  std::vector<SpherePoint> means(static_cast<std::size_t>(B),
                                 SpherePoint::circle(0.0));
  parallel_for(B, threads, [&](long b) {
    RandomStream rs(seed, stream_base + static_cast<std::uint64_t>(b), 0);
    std::vector<double> flat(static_cast<std::size_t>(n) * w);
    for (long i = 0; i < n; ++i) {
      const long j = static_cast<long>(rs.index(static_cast<std::uint64_t>(n)));
      const auto row = sample.vec(j);
      std::copy(row.begin(), row.end(),
                flat.begin() + static_cast<std::ptrdiff_t>(
                                   static_cast<std::size_t>(i) * w));
    }
    const Sample resampled =
        sample.dim() == 1 ? Sample::circle(std::move(flat))
                          : Sample::embedded(sample.dim(), std::move(flat));
    FrechetMeanOptions opt;
    opt.tie_break_seed =
        seed ^ ((stream_base + static_cast<std::uint64_t>(b)) *
                0x6a09e667f3bcc909ull);
    means[static_cast<std::size_t>(b)] = frechet_mean(resampled, opt).mean;
  });
  return means;
}

// Covariance of the chart coordinates of `points` at `base` (centered at
// their coordinate mean, 1/B normalization).
Eigen::MatrixXd point_cloud_covariance(const SpherePoint& base,
                                       const std::vector<SpherePoint>& points) {
  const int m = base.dim();
  Eigen::MatrixXd coords(static_cast<long>(points.size()), m);
  for (std::size_t i = 0; i < points.size(); ++i)
    coords.row(static_cast<long>(i)) = chart_coords(base, points[i]).transpose();
  const Eigen::RowVectorXd mean = coords.colwise().mean();
  const Eigen::MatrixXd centered = coords.rowwise() - mean;
  return (centered.transpose() * centered) /
         static_cast<double>(points.size());
}

// Express a covariance living in the chart at `from` in the chart at `to`,
// by parallel transport along the connecting geodesic.
Eigen::MatrixXd transport_covariance(const Eigen::MatrixXd& cov,
                                     const SpherePoint& from,
                                     const SpherePoint& to) {
  const int m = from.dim();
  if (m == 1) return cov;  // one-dimensional charts share the angular basis
  const std::size_t d = static_cast<std::size_t>(m) + 1;
  const auto bf = tangent_basis(from);
  const auto bt = tangent_basis(to);
  const auto R = detail::transport_matrix(from.coords(), to.coords());
  Eigen::MatrixXd map(m, m);  // rows: target basis, cols: source basis
  std::vector<double> tmp(d);
  for (int j = 0; j < m; ++j) {
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c)
        acc += R[r * d + c] * bf[static_cast<std::size_t>(j)][c];
      tmp[r] = acc;
    }
    for (int i = 0; i < m; ++i)
      map(i, j) = detail::dot(tmp, bt[static_cast<std::size_t>(i)]);
  }
  return map * cov * map.transpose();
}

TestReport finish_report(TestMethod method, double statistic, int dof, long n1,
                         long n2, long B, std::uint64_t seed) {
  TestReport r;
  r.method = method;
  r.statistic = statistic;
  r.dof = dof;
  r.p_value = chi_squared_upper_tail(statistic, dof);
  r.n1 = n1;
  r.n2 = n2;
  r.bootstrap_count = B;
  r.seed = seed;
  return r;
}

}  // namespace

std::string test_method_name(TestMethod method) {
  return method == TestMethod::quantile ? "quantile" : "bootstrap";
}

TestMethod test_method_from_name(const std::string& name) {
  if (name == "quantile") return TestMethod::quantile;
  if (name == "bootstrap") return TestMethod::bootstrap;
  fail_usage("unknown test method \"" + name + "\"");
}

TestReport one_sample_quantile_test(const Sample& sample,
                                    const SpherePoint& mu0) {
  if (sample.dim() != mu0.dim())
    fail_data("one_sample_quantile_test: dimension mismatch");
  const int m = sample.dim();
  if (sample.size() <= m)
    fail_data("one_sample_quantile_test: needs n > m");
  const Eigen::MatrixXd sigma = empirical_tangent_covariance(sample, mu0);
  const Eigen::MatrixXd sigma_inv =
      invert_psd(sigma, "one_sample_quantile_test");
  const auto mean = frechet_mean(sample);
  const Eigen::VectorXd phi = chart_coords(mu0, mean.mean);
  const double t =
      static_cast<double>(sample.size()) * phi.dot(sigma_inv * phi);
  return finish_report(TestMethod::quantile, t, m, sample.size(), 0, 0, 0);
}

TestReport two_sample_quantile_test(const Sample& s1, const Sample& s2) {
  if (s1.dim() != s2.dim())
    fail_data("two_sample_quantile_test: dimension mismatch");
  const int m = s1.dim();
  if (s1.size() <= m || s2.size() <= m)
    fail_data("two_sample_quantile_test: needs n > m in both samples");
  const auto pooled = frechet_mean(concatenate(s1, s2)).mean;
  const Eigen::VectorXd d1 = chart_coords(pooled, frechet_mean(s1).mean);
  const Eigen::VectorXd d2 = chart_coords(pooled, frechet_mean(s2).mean);
  const Eigen::VectorXd delta = d1 - d2;
  const Eigen::MatrixXd pooled_cov =
      empirical_tangent_covariance(s1, pooled) / static_cast<double>(s1.size()) +
      empirical_tangent_covariance(s2, pooled) / static_cast<double>(s2.size());
  const Eigen::MatrixXd inv = invert_psd(pooled_cov, "two_sample_quantile_test");
  const double t = delta.dot(inv * delta);
  return finish_report(TestMethod::quantile, t, m, s1.size(), s2.size(), 0, 0);
}

TestReport two_sample_bootstrap_test(const Sample& s1, const Sample& s2,
                                     long B, std::uint64_t seed, int threads) {
  if (s1.dim() != s2.dim())
    fail_data("two_sample_bootstrap_test: dimension mismatch");
  if (s1.size() < 10 || s2.size() < 10)
    fail_data("two_sample_bootstrap_test: needs n >= 10 in both samples");
  if (B < 100) fail_usage("two_sample_bootstrap_test: B must be >= 100");
  const int m = s1.dim();

  const auto mean1 = frechet_mean(s1).mean;
  const auto mean2 = frechet_mean(s2).mean;
  const auto pooled = frechet_mean(concatenate(s1, s2)).mean;

  const auto boot1 =
      bootstrap_means(s1, B, seed, 1ull << 32, threads);
  const auto boot2 =
      bootstrap_means(s2, B, seed, 2ull << 32, threads);
  Eigen::MatrixXd cov1 = point_cloud_covariance(mean1, boot1);
  Eigen::MatrixXd cov2 = point_cloud_covariance(mean2, boot2);
  cov1 = transport_covariance(cov1, mean1, pooled);
  cov2 = transport_covariance(cov2, mean2, pooled);

  const Eigen::VectorXd delta =
      chart_coords(pooled, mean1) - chart_coords(pooled, mean2);
  Eigen::MatrixXd total = cov1 + cov2;
  const Eigen::MatrixXd inv = [&] {
    try {
      return invert_psd(total, "two_sample_bootstrap_test");
    } catch (const Error&) {
      fail_numeric(
          "two_sample_bootstrap_test: singular bootstrap covariance; "
          "increase B");
    }
  }();
  const double t = delta.dot(inv * delta);
  return finish_report(TestMethod::bootstrap, t, m, s1.size(), s2.size(), B,
                       seed);
}

namespace {

Sample rotate_sample(const Sample& s, double angle) {
  if (s.dim() == 1) {
    std::vector<double> a = s.angles();
    for (double& v : a) v = wrap_angle(v + angle);
    return Sample::circle(std::move(a));
  }
  // Rotation by `angle` in the plane of the first two ambient axes.
  const double c = std::cos(angle), sn = std::sin(angle);
  std::vector<double> flat(s.raw().begin(), s.raw().end());
  const std::size_t w = s.row_len();
  for (long i = 0; i < s.size(); ++i) {
    double& x0 = flat[static_cast<std::size_t>(i) * w];
    double& x1 = flat[static_cast<std::size_t>(i) * w + 1];
    const double r0 = c * x0 - sn * x1;
    const double r1 = sn * x0 + c * x1;
    x0 = r0;
    x1 = r1;
  }
  return Sample::embedded(s.dim(), std::move(flat));
}

}  // namespace

std::vector<RejectionRow> rejection_curve(const DistributionSpec& base_spec,
                                          const std::vector<double>& offsets,
                                          long n, long replicates, double level,
                                          TestMethod method, long B,
                                          std::uint64_t seed, int threads) {
  if (offsets.empty()) fail_usage("rejection_curve: no offsets given");
  for (const double o : offsets)
    if (!std::isfinite(o)) fail_usage("rejection_curve: non-finite offset");
  if (replicates < 100)
    fail_usage("rejection_curve: needs at least 100 replicates");
  if (!(level > 0.0 && level < 1.0))
    fail_usage("rejection_curve: level must lie in (0, 1)");
  if (method == TestMethod::bootstrap && B < 100)
    fail_usage("rejection_curve: bootstrap method needs B >= 100");

  const Sampler sampler(base_spec);
  std::vector<RejectionRow> rows;
  for (std::size_t o = 0; o < offsets.size(); ++o) {
    std::vector<signed char> verdict(static_cast<std::size_t>(replicates), -1);
    parallel_for(replicates, threads, [&](long r) {
      const std::uint64_t pair_id =
          static_cast<std::uint64_t>(o) * static_cast<std::uint64_t>(replicates) +
          static_cast<std::uint64_t>(r);
      const Sample a = sampler.draw_n(n, seed, 2 * pair_id);
      const Sample b =
          rotate_sample(sampler.draw_n(n, seed, 2 * pair_id + 1), offsets[o]);
      try {
        TestReport report;
        if (method == TestMethod::quantile) {
          report = two_sample_quantile_test(a, b);
        } else {
          const std::uint64_t rep_seed =
              RandomStream(seed, 0xb007, pair_id).next_u64();
          report = two_sample_bootstrap_test(a, b, B, rep_seed, 1);
        }
        verdict[static_cast<std::size_t>(r)] =
            report.p_value < level ? 1 : 0;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numeric) throw;
        verdict[static_cast<std::size_t>(r)] = -1;
      }
    });
    long rejections = 0, failures = 0;
    for (const auto v : verdict) {
      if (v < 0)
        ++failures;
      else
        rejections += v;
    }
    const long effective = replicates - failures;
    if (failures > replicates / 100)
      fail_numeric("rejection_curve: more than 1% of replicates failed");
    RejectionRow row;
    row.offset = offsets[o];
    row.method = method;
    row.n = n;
    row.level = level;
    row.rejections = rejections;
    row.replicates = effective;
    row.rate = static_cast<double>(rejections) / static_cast<double>(effective);
    row.se = std::sqrt(row.rate * (1.0 - row.rate) /
                       static_cast<double>(effective));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fss
