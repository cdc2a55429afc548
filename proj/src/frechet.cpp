#include "fss/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fss/error.hpp"
#include "fss/parallel.hpp"

namespace fss {

namespace {

double circle_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, kTwoPi - d);
}

// Kahan-compensated mean of squared distances on the circle.
double circle_frechet_value(std::span<const double> angles, double p) {
  long double acc = 0.0;
  for (const double a : angles) {
    const double d = circle_distance(a, p);
    acc += static_cast<long double>(d) * d;
  }
  return static_cast<double>(acc / static_cast<long double>(angles.size()));
}

double sphere_frechet_value(const Sample& sample, std::span<const double> p) {
  long double acc = 0.0;
  const long n = sample.size();
  for (long i = 0; i < n; ++i) {
    const double d = detail::ambient_distance(sample.vec(i), p);
    acc += static_cast<long double>(d) * d;
  }
  return static_cast<double>(acc / static_cast<long double>(n));
}

// Deterministic low-discrepancy seed points: Halton pairs through Box-Muller,
// normalized onto the sphere.
double halton(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

std::vector<std::vector<double>> sphere_seed_points(int m, int count) {
  static constexpr std::uint64_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                             23, 29, 31, 37, 41, 43, 47, 53};
  const std::size_t d = static_cast<std::size_t>(m) + 1;
  std::vector<std::vector<double>> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; j += 2) {
      const double u = std::min(std::max(halton(static_cast<std::uint64_t>(k) + 1,
                                                primes[j % 16]),
                                         1e-12),
                                1.0 - 1e-12);
      const double t = halton(static_cast<std::uint64_t>(k) + 1, primes[(j + 1) % 16]);
      const double r = std::sqrt(-2.0 * std::log(u));
      v[j] = r * std::cos(kTwoPi * t);
      if (j + 1 < d) v[j + 1] = r * std::sin(kTwoPi * t);
    }
    const double n = detail::norm(v);
    if (n < 1e-12) continue;
    for (double& x : v) x /= n;
    seeds.push_back(std::move(v));
  }
  return seeds;
}

struct DescentResult {
  std::vector<double> point;
  double value = 0.0;
  double gradient_norm = 0.0;
  long iterations = 0;
};

// Riemannian gradient descent for F_n on S^m with Armijo backtracking from a
// base step of `step` (0.5 recenters exactly in the Euclidean limit).
DescentResult sphere_descent(const Sample& sample, std::vector<double> start,
                             const FrechetMeanOptions& opt) {
  const long n = sample.size();
  const std::size_t d = start.size();
  std::vector<double> grad(d), log_buf(d), trial(d);
  double value = sphere_frechet_value(sample, start);
  long iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    // grad F_n(p) = -(2/n) sum log_p(x_j)
    std::fill(grad.begin(), grad.end(), 0.0);
    bool antipodal = false;
    for (long i = 0; i < n; ++i) {
      const double dist = detail::ambient_log(start, sample.vec(i), log_buf);
      if (dist > kPi - 1e-12) {
        antipodal = true;
        break;
      }
      for (std::size_t k = 0; k < d; ++k) grad[k] += log_buf[k];
    }
    if (antipodal) {
      // A data point sits at the cut locus of the iterate; nudge the iterate
      // in a fixed tangent direction and retry.
      const auto basis = tangent_basis(SpherePoint::embedded_normalized(start));
      double nn = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        start[k] += 1e-9 * basis[0][k];
        nn += start[k] * start[k];
      }
      nn = std::sqrt(nn);
      for (double& s : start) s /= nn;
      value = sphere_frechet_value(sample, start);
      continue;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double gnorm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      grad[k] *= -2.0 * inv_n;
      gnorm2 += grad[k] * grad[k];
    }
    const double gnorm = std::sqrt(gnorm2);
    if (gnorm < opt.gradient_tolerance)
      return {std::move(start), value, gnorm, iter};

    // Once the certified Armijo decrease falls below the floating-point
    // resolution of F_n, line-search acceptance becomes noise; the base step
    // is a contraction near a strict minimum, so take it directly.
    const double f_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::fabs(value));
    if (1e-4 * opt.step * gnorm2 < f_floor) {
      detail::ambient_exp(start, grad, -opt.step, trial);
      start.swap(trial);
      value = sphere_frechet_value(sample, start);
      continue;
    }

    double s = opt.step;
    bool moved = false;
    while (s >= 1e-14) {
      detail::ambient_exp(start, grad, -s, trial);
      const double fv = sphere_frechet_value(sample, trial);
      if (fv <= value - 1e-4 * s * gnorm2) {
        start.swap(trial);
        value = fv;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) {
      // Cannot decrease along the gradient at floating-point resolution.
      if (gnorm < 1e-6) return {std::move(start), value, gnorm, iter};
      fail_numeric("frechet_mean: descent stalled with gradient norm " +
                   std::to_string(gnorm));
    }
  }
  std::ostringstream msg;
  msg << "frechet_mean: no convergence after " << opt.max_iterations
      << " iterations";
  fail_numeric(msg.str());
}

FrechetMeanResult sphere_frechet_mean(const Sample& sample,
                                      const FrechetMeanOptions& opt) {
  const int m = sample.dim();
  const std::size_t d = static_cast<std::size_t>(m) + 1;
  const long n = sample.size();

  std::vector<std::vector<double>> starts;
  if (opt.localize_at) {
    if (opt.localize_at->dim() != m)
      fail_data("frechet_mean: localization point dimension mismatch");
    starts.push_back(opt.localize_at->coords());
  } else {
    // Ambient mean seed plus screened low-discrepancy seeds: descend from the
    // ambient seed and from the best grid seed by F_n value.
    std::vector<double> mean(d, 0.0);
    for (long i = 0; i < n; ++i) {
      const auto v = sample.vec(i);
      for (std::size_t k = 0; k < d; ++k) mean[k] += v[k];
    }
    const double mn = detail::norm(mean);
    if (mn > 1e-12) {
      for (double& x : mean) x /= mn;
      starts.push_back(std::move(mean));
    }
    auto grid = sphere_seed_points(m, opt.grid_seeds);
    const std::vector<double>* best = nullptr;
    double best_val = std::numeric_limits<double>::infinity();
    for (const auto& g : grid) {
      const double v = sphere_frechet_value(sample, g);
      if (v < best_val) {
        best_val = v;
        best = &g;
      }
    }
    if (best) starts.push_back(*best);
    if (starts.empty()) starts = std::move(grid);
  }

  std::optional<DescentResult> best;
  bool tie = false;
  for (auto& s : starts) {
    DescentResult r = sphere_descent(sample, std::move(s), opt);
    if (!best) {
      best = std::move(r);
      continue;
    }
    const double dist = detail::ambient_distance(r.point, best->point);
    if (r.value < best->value - opt.tie_tolerance) {
      best = std::move(r);
      tie = false;
    } else if (r.value < best->value + opt.tie_tolerance && dist > 1e-6) {
      tie = true;
      // Uniform choice between tied minimizers.
      RandomStream ts(opt.tie_break_seed, 0x7165, 0);
      if (ts.uniform() < 0.5) best = std::move(r);
    }
  }

  FrechetMeanResult out;
  out.mean = SpherePoint::embedded_normalized(best->point);
  out.value = best->value;
  out.candidates_evaluated = static_cast<long>(starts.size());
  out.tie_flag = tie;
  out.gradient_norm = best->gradient_norm;
  return out;
}

}  // namespace

double frechet_function(const Sample& sample, const SpherePoint& p) {
  if (sample.size() < 1) fail_data("frechet_function: empty sample");
  if (sample.dim() != p.dim())
    fail_data("frechet_function: dimension mismatch");
  if (sample.dim() == 1) return circle_frechet_value(sample.angles(), p.angle());
  return sphere_frechet_value(sample, p.coords());
}

namespace detail {

CircleMeanResult circle_frechet_mean(std::vector<double> angles,
                                     std::uint64_t tie_break_seed,
                                     double tie_tolerance) {
  const long n = static_cast<long>(angles.size());
  if (n == 0) fail_data("frechet_mean: empty sample");
  if (n == 1) return {wrap_angle(angles[0]), 0.0, false, 0.0};

  std::vector<double> sorted = angles;
  std::sort(sorted.begin(), sorted.end());

  // Prefix sums over the sorted angles (long double to keep candidate value
  // differences meaningful at the tie tolerance).
  std::vector<long double> p1(static_cast<std::size_t>(n) + 1, 0.0L);
  std::vector<long double> p2(static_cast<std::size_t>(n) + 1, 0.0L);
  for (long i = 0; i < n; ++i) {
    const long double x = sorted[static_cast<std::size_t>(i)];
    p1[static_cast<std::size_t>(i) + 1] = p1[static_cast<std::size_t>(i)] + x;
    p2[static_cast<std::size_t>(i) + 1] = p2[static_cast<std::size_t>(i)] + x * x;
  }
  const long double s1 = p1[static_cast<std::size_t>(n)];
  const long double s2 = p2[static_cast<std::size_t>(n)];
  const double xbar = static_cast<double>(s1 / n);

  // Every local minimizer of F_n has the form xbar + 2 pi k / n. Points below
  // c - pi wrap up by 2 pi, points at or above c + pi wrap down; both sets
  // are contiguous in the sorted order, so each candidate costs O(log n).
  auto candidate_value = [&](double c) -> long double {
    const auto lo_it = std::lower_bound(sorted.begin(), sorted.end(), c - kPi);
    const auto hi_it = std::lower_bound(sorted.begin(), sorted.end(), c + kPi);
    const long lo = static_cast<long>(lo_it - sorted.begin());
    const long hi = static_cast<long>(hi_it - sorted.begin());
    const long double base =
        s2 - 2.0L * c * s1 + static_cast<long double>(n) * c * c;
    const long double low_adj =
        4.0L * kPi * (p1[static_cast<std::size_t>(lo)] -
                      static_cast<long double>(lo) * c) +
        4.0L * kPi * kPi * static_cast<long double>(lo);
    const long double high_adj =
        -4.0L * kPi * ((s1 - p1[static_cast<std::size_t>(hi)]) -
                       static_cast<long double>(n - hi) * c) +
        4.0L * kPi * kPi * static_cast<long double>(n - hi);
    return (base + low_adj + high_adj) / static_cast<long double>(n);
  };

  std::vector<double> candidates(static_cast<std::size_t>(n));
  std::vector<long double> values(static_cast<std::size_t>(n));
  long best = 0;
  for (long k = 0; k < n; ++k) {
    const double c = wrap_angle(xbar + kTwoPi * static_cast<double>(k) /
                                           static_cast<double>(n));
    candidates[static_cast<std::size_t>(k)] = c;
    values[static_cast<std::size_t>(k)] = candidate_value(c);
    if (values[static_cast<std::size_t>(k)] < values[static_cast<std::size_t>(best)])
      best = k;
  }

  std::vector<long> tied;
  for (long k = 0; k < n; ++k) {
    if (values[static_cast<std::size_t>(k)] - values[static_cast<std::size_t>(best)] <
            static_cast<long double>(tie_tolerance) &&
        circle_distance(candidates[static_cast<std::size_t>(k)],
                        candidates[static_cast<std::size_t>(best)]) > 1e-9)
      tied.push_back(k);
  }
  bool tie = !tied.empty();
  long chosen = best;
  if (tie) {
    tied.push_back(best);
    std::sort(tied.begin(), tied.end());
    RandomStream ts(tie_break_seed, 0x7165, 0);
    chosen = tied[static_cast<std::size_t>(ts.index(tied.size()))];
  }

  const double c = candidates[static_cast<std::size_t>(chosen)];
  long double grad = 0.0;
  for (const double a : angles) {
    double z = a - c;
    if (z < -kPi) z += kTwoPi;
    if (z >= kPi) z -= kTwoPi;
    grad += z;
  }
  CircleMeanResult out;
  out.angle = c;
  out.value = circle_frechet_value(angles, c);
  out.tie = tie;
  out.gradient_norm =
      std::fabs(static_cast<double>(2.0L * grad / static_cast<long double>(n)));
  return out;
}

}  // namespace detail

FrechetMeanResult frechet_mean(const Sample& sample,
                               const FrechetMeanOptions& options) {
  if (sample.size() < 1) fail_data("frechet_mean: empty sample");
  if (sample.dim() == 1) {
    auto r = detail::circle_frechet_mean(sample.angles(), options.tie_break_seed,
                                         options.tie_tolerance);
    FrechetMeanResult out;
    out.mean = SpherePoint::circle(r.angle);
    out.value = r.value;
    out.candidates_evaluated = sample.size();
    out.tie_flag = r.tie;
    out.gradient_norm = r.gradient_norm;
    return out;
  }
  return sphere_frechet_mean(sample, options);
}

Eigen::MatrixXd empirical_tangent_covariance(const Sample& sample,
                                             const SpherePoint& base) {
  if (sample.dim() != base.dim())
    fail_data("empirical_tangent_covariance: dimension mismatch");
  const long n = sample.size();
  const int m = sample.dim();
  Eigen::MatrixXd coords(n, m);
  if (m == 1) {
    for (long i = 0; i < n; ++i) {
      const double d = circle_distance(sample.angle(i), base.angle());
      if (d > kPi - 1e-12)
        fail_numeric("empirical_tangent_covariance: antipodal sample point");
      coords(i, 0) = wrap_angle(sample.angle(i) - base.angle());
    }
  } else {
    const auto basis = tangent_basis(base);
    const std::size_t d = static_cast<std::size_t>(m) + 1;
    std::vector<double> buf(d);
    for (long i = 0; i < n; ++i) {
      const double dist = detail::ambient_log(base.coords(), sample.vec(i), buf);
      if (dist > kPi - 1e-12)
        fail_numeric("empirical_tangent_covariance: antipodal sample point");
      for (int k = 0; k < m; ++k)
        coords(i, k) = detail::dot(buf, basis[static_cast<std::size_t>(k)]);
    }
  }
  const Eigen::RowVectorXd mean = coords.colwise().mean();
  const Eigen::MatrixXd centered = coords.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(n);
}

namespace {

struct ReplicateStat {
  double d2 = 0.0;
  bool ok = false;
};

ModulationEntry summarize(long n, const std::vector<ReplicateStat>& stats,
                          double variance) {
  long ok = 0;
  long double acc = 0.0;
  for (const auto& s : stats)
    if (s.ok) {
      acc += s.d2;
      ++ok;
    }
  const long failed = static_cast<long>(stats.size()) - ok;
  if (failed > std::max<long>(1, static_cast<long>(stats.size()) / 1000))
    fail_numeric("monte_carlo_modulation: too many replicate failures (" +
                 std::to_string(failed) + ")");
  const double mean_d2 = static_cast<double>(acc / ok);
  long double ss = 0.0;
  for (const auto& s : stats)
    if (s.ok) {
      const long double dev = s.d2 - mean_d2;
      ss += dev * dev;
    }
  const double sd = ok > 1 ? std::sqrt(static_cast<double>(ss / (ok - 1))) : 0.0;
  ModulationEntry e;
  e.n = n;
  e.modulation = static_cast<double>(n) * mean_d2 / variance;
  e.se = static_cast<double>(n) * sd / (variance * std::sqrt(static_cast<double>(ok)));
  e.replicates = ok;
  return e;
}

}  // namespace

ModulationCurve monte_carlo_modulation(const DistributionSpec& spec,
                                       std::vector<long> n_grid,
                                       long replicates, std::uint64_t seed,
                                       int threads) {
  if (n_grid.empty()) fail_usage("monte_carlo_modulation: empty n grid");
  for (const long n : n_grid)
    if (n < 1) fail_usage("monte_carlo_modulation: sample sizes must be >= 1");
  if (replicates < 2)
    fail_usage("monte_carlo_modulation: needs at least 2 replicates");
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());

  const auto pop = population_mean_and_variance(spec);
  const Sampler sampler(spec);
  const bool circle = spec_dim(spec) == 1;

  ModulationCurve curve;
  for (const long n : n_grid) {
    if (n == 1) {
      // mean_1 = X_1 and V_1 = V, so the modulation is identically 1.
      curve.entries.push_back({1, 1.0, 0.0, replicates});
      continue;
    }
    std::vector<ReplicateStat> stats(static_cast<std::size_t>(replicates));
    parallel_for(replicates, threads, [&](long r) {
      const std::uint64_t stream =
          (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(r);
      const Sample s = sampler.draw_n(n, seed, stream);
      FrechetMeanOptions opt;
      opt.tie_break_seed = seed ^ (stream * 0x9e3779b97f4a7c15ull);
      if (!circle && !pop.unique_global) opt.localize_at = pop.mean;
      try {
        const auto mean = frechet_mean(s, opt);
        const double d = geodesic_distance(mean.mean, pop.mean);
        stats[static_cast<std::size_t>(r)] = {d * d, true};
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numeric) throw;
        stats[static_cast<std::size_t>(r)].ok = false;
      }
    });
    curve.entries.push_back(summarize(n, stats, pop.variance));
  }
  return curve;
}

BootstrapModulationResult bootstrap_modulation(const Sample& sample, long B,
                                               std::uint64_t seed,
                                               int threads) {
  const long n = sample.size();
  if (n < 2) fail_data("bootstrap_modulation: needs a sample of size >= 2");
  if (B < 100) fail_usage("bootstrap_modulation: B must be >= 100");

  FrechetMeanOptions opt;
  opt.tie_break_seed = seed;
  const auto center = frechet_mean(sample, opt);
  const Eigen::MatrixXd cov = empirical_tangent_covariance(sample, center.mean);
  const double tr = cov.trace();
  if (!(tr > 1e-300))
    fail_data("bootstrap_modulation: degenerate sample (zero dispersion)");

  const bool circle = sample.dim() == 1;
  const std::size_t w = sample.row_len();
  std::vector<ReplicateStat> stats(static_cast<std::size_t>(B));
  parallel_for(B, threads, [&](long b) {
    RandomStream rs(seed, static_cast<std::uint64_t>(b) + 1, 0);
    std::vector<double> flat(static_cast<std::size_t>(n) * w);
    for (long i = 0; i < n; ++i) {
      const long j = static_cast<long>(rs.index(static_cast<std::uint64_t>(n)));
      const auto row = sample.vec(j);
      std::copy(row.begin(), row.end(),
                flat.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * w));
    }
    const Sample resampled = circle
                                 ? Sample::circle(std::move(flat))
                                 : Sample::embedded(sample.dim(), std::move(flat));
    FrechetMeanOptions ropt;
    ropt.tie_break_seed = seed ^ (static_cast<std::uint64_t>(b) * 0x6a09e667f3bcc909ull);
    try {
      const auto mean = frechet_mean(resampled, ropt);
      const double d = geodesic_distance(mean.mean, center.mean);
      stats[static_cast<std::size_t>(b)] = {d * d, true};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::numeric) throw;
      stats[static_cast<std::size_t>(b)].ok = false;
    }
  });
  const auto entry = summarize(n, stats, tr);
  return {entry.modulation, entry.se, n, entry.replicates};
}

}  // namespace fss
