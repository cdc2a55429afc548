#include "fss/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fss/error.hpp"
#include "fss/quadrature.hpp"

namespace fss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Real>
Real powi(Real x, int k) {
  Real r = 1;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

double circle_limit_modulation(double f_pi) {
  if (!(f_pi >= 0.0)) fail_usage("circle_limit_modulation: f_pi must be >= 0");
  const double t = kTwoPi * f_pi;
  if (std::fabs(t - 1.0) < 1e-12) return kInf;
  if (t > 1.0)
    fail_numeric(
        "circle_limit_modulation: 2*pi*f exceeds 1, outside the covered regime");
  const double d = 1.0 - t;
  return 1.0 / (d * d);
}

namespace detail {

double ring_frechet_function_tol(int m, double theta, double psi,
                                 long double tol) {
  if (m < 2) fail_usage("ring_frechet_function: m must be >= 2");
  if (theta < -1e-12 || theta > kPi + 1e-12)
    fail_usage("ring_frechet_function: theta outside [0, pi]");
  psi = std::fabs(psi);  // even in psi
  if (psi > kPi + 1e-12)
    fail_usage("ring_frechet_function: psi outside [-pi, pi]");

  // The |sin phi|^{m-2} weight is symmetric about phi = pi and the integrand
  // depends on phi through cos phi only, so both integrals reduce to [0, pi].
  const long double ct = std::cos(static_cast<long double>(theta));
  const long double st = std::sin(static_cast<long double>(theta));
  const long double cp = std::cos(static_cast<long double>(psi));
  const long double sp = std::sin(static_cast<long double>(psi));
  const auto num = [&](long double phi) {
    long double arg = cp * ct + sp * st * std::cos(phi);
    arg = std::clamp(arg, -1.0L, 1.0L);
    const long double a = std::acos(arg);
    return powi(std::sin(phi), m - 2) * a * a;
  };
  const auto den = [&](long double phi) { return powi(std::sin(phi), m - 2); };
  const long double top = adaptive_simpson<long double>(
      num, 0.0L, static_cast<long double>(kPi), tol, 24);
  const long double bottom = adaptive_simpson<long double>(
      den, 0.0L, static_cast<long double>(kPi), tol, 24);
  return static_cast<double>(top / bottom);
}

}  // namespace detail

double ring_frechet_function(int m, double theta, double psi) {
  return detail::ring_frechet_function_tol(m, theta, psi, 1e-13L);
}

namespace detail {

double theta_cot_theta(double theta) {
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    return 1.0 - t2 / 3.0 - t2 * t2 / 45.0;
  }
  return theta * std::cos(theta) / std::sin(theta);
}

}  // namespace detail

double ring_hessian_coefficient(int m, double theta) {
  if (m < 2) fail_usage("ring_hessian_coefficient: m must be >= 2");
  if (theta <= 0.0) return 1.0;          // theta -> 0 limit
  if (theta >= kPi) return -kInf;        // theta -> pi limit
  const double mm = static_cast<double>(m);
  return 1.0 / mm + (mm - 1.0) / mm * detail::theta_cot_theta(theta);
}

namespace {

// E[h(theta)] against a tabulated polar density; the integrand is written as
// rho/m + ((m-1)/m) * (theta/sin theta) * cos theta * rho, which is finite at
// 0 and diverges at pi only when the density is positive there.
double density_hessian_integral(int m, const MixingMeasure& mix) {
  const double mm = static_cast<double>(m);
  if (detail::interp_density(mix.density_theta, mix.density_value,
                             kPi) > 1e-12)
    fail_numeric("rotsym_hessian: divergent integral (density mass at pi)");
  auto integrand = [&](double t) {
    const double rho =
        detail::interp_density(mix.density_theta, mix.density_value, t);
    if (rho == 0.0) return 0.0;
    const double ratio = t < 1e-4 ? 1.0 + t * t / 6.0 : t / std::sin(t);
    return rho / mm + (mm - 1.0) / mm * ratio * std::cos(t) * rho;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < mix.density_theta.size(); ++i) {
    const double lo = mix.density_theta[i];
    const double hi = std::min(mix.density_theta[i + 1], kPi - 1e-9);
    if (hi <= lo) continue;
    acc += integrate(integrand, lo, hi, 1e-11);
  }
  return acc;
}

}  // namespace

namespace detail {

double hessian_coefficient(const DistributionSpec& spec) {
  if (const auto* r = std::get_if<RingMixture>(&spec))
    return (1.0 - r->alpha) + r->alpha * ring_hessian_coefficient(r->m, r->theta);
  if (const auto* rs = std::get_if<RotSym>(&spec)) {
    double acc = 0.0;
    for (const auto& a : rs->mixing.atoms) {
      if (a.theta > kPi - 1e-12)
        fail_numeric("rotsym_hessian: divergent integral (atom at pi)");
      acc += a.weight * ring_hessian_coefficient(rs->m, std::max(a.theta, 0.0));
    }
    if (rs->mixing.has_density())
      acc += density_hessian_integral(rs->m, rs->mixing);
    return acc;
  }
  if (const auto* vf = std::get_if<VonMisesFisher>(&spec)) {
    // Weight e^{k cos t} sin^{m-1} t; the cot factor cancels one sine, so the
    // integrand sin^{m-2} t * t cos t * e^{k cos t} is finite on [0, pi].
    const double k = vf->kappa;
    const int m = vf->m;
    const double mm = static_cast<double>(m);
    auto w = [k, m](double t) {
      return std::exp(k * std::cos(t)) * powi(std::sin(t), m - 1);
    };
    auto g = [k, m, mm](double t) {
      const double e = std::exp(k * std::cos(t));
      const double s = std::sin(t);
      return e * powi(s, m - 1) / mm +
             (mm - 1.0) / mm * t * std::cos(t) * powi(s, m - 2) * e;
    };
    const double z = integrate(w, 0.0, kPi, 1e-13);
    return integrate(g, 0.0, kPi, 1e-13) / z;
  }
  fail_usage("hessian_coefficient: spec is not rotationally symmetric on S^m");
}

}  // namespace detail

Eigen::MatrixXd rotsym_hessian(int m, const MixingMeasure& mixing) {
  if (m < 2) fail_usage("rotsym_hessian: m must be >= 2");
  RotSym spec{m, mixing};
  validate_spec(DistributionSpec{spec});
  const double coeff = detail::hessian_coefficient(DistributionSpec{spec});
  return 2.0 * coeff * Eigen::MatrixXd::Identity(m, m);
}

CLTResult clt_analysis(const DistributionSpec& spec) {
  validate_spec(spec);
  const int m = spec_dim(spec);
  CLTResult out;
  out.m = m;

  if (m == 1) {
    const auto pop = population_mean_and_variance(spec);
    const double f = antipodal_density(spec);
    const double h = 2.0 * (1.0 - kTwoPi * f);
    if (!(h > 1e-12))
      fail_numeric("clt_analysis: Hessian not positive definite (smeary or unstable)");
    out.hessian = Eigen::MatrixXd::Constant(1, 1, h);
    out.sigma = Eigen::MatrixXd::Constant(1, 1, pop.variance);
    out.population_variance = pop.variance;
  } else {
    const double coeff = detail::hessian_coefficient(spec);
    if (!(coeff > 1e-12))
      fail_numeric("clt_analysis: Hessian not positive definite (smeary or unstable)");
    const double second_moment = detail::mixing_expectation(
        spec, [](double t) { return t * t; });
    out.hessian = 2.0 * coeff * Eigen::MatrixXd::Identity(m, m);
    // log_mu X has norm theta and uniform direction, so the covariance is
    // E[theta^2]/m times the identity.
    out.sigma = (second_moment / m) * Eigen::MatrixXd::Identity(m, m);
    out.population_variance = second_moment;
  }

  const Eigen::MatrixXd hinv = out.hessian.inverse();
  out.asymptotic_cov = 4.0 * hinv * out.sigma * hinv;
  out.limit_modulation = out.asymptotic_cov.trace() / out.population_variance;
  return out;
}

double ring_feasibility_threshold(int m) {
  if (m < 2) fail_usage("ring_feasibility_threshold: m must be >= 2");
  const double target = -1.0 / (static_cast<double>(m) - 1.0);
  double lo = kPi / 2.0, hi = kPi - 1e-12;
  // theta cot theta decreases from 0 to -inf on (pi/2, pi).
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::theta_cot_theta(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

RingSearchResult ring_mixture_search(int m, double target) {
  if (m < 2) fail_usage("ring_mixture_search: m must be >= 2");
  if (!(target >= 1.0)) fail_usage("ring_mixture_search: target must be >= 1");

  constexpr int kThetaCells = 384;
  constexpr int kAlphaCells = 384;
  RingSearchResult best{m, target, 0.0, 0.0, 0.0};
  for (int i = 0; i < kThetaCells; ++i) {
    const double theta = kPi / 2.0 + (i + 0.5) * (kPi / 2.0) / kThetaCells;
    const double h = ring_hessian_coefficient(m, theta);
    for (int j = 0; j < kAlphaCells; ++j) {
      const double alpha = static_cast<double>(j + 1) / (kAlphaCells + 1);
      const double c = (1.0 - alpha) + alpha * h;
      if (!(c > 1e-9)) continue;
      const double limit = 1.0 / (c * c);
      if (limit > best.achieved_limit) {
        best.theta = theta;
        best.alpha = alpha;
        best.achieved_limit = limit;
      }
      if (limit > target) {
        const auto clt = clt_analysis(RingMixture{m, theta, alpha});
        return {m, target, theta, alpha, clt.limit_modulation};
      }
    }
  }
  std::ostringstream msg;
  msg << "ring_mixture_search: target " << target
      << " unreachable on the search grid; best limit " << best.achieved_limit
      << " at theta=" << best.theta << ", alpha=" << best.alpha;
  fail_numeric(msg.str());
}

std::string fss_label_name(FSSLabel label) {
  switch (label) {
    case FSSLabel::euclidean: return "euclidean";
    case FSSLabel::type_one: return "type_one";
    case FSSLabel::type_two: return "type_two";
    case FSSLabel::smeary: return "smeary";
    case FSSLabel::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

FSSClass classify_fss(const ModulationCurve& curve,
                      std::optional<double> analytic_limit) {
  if (curve.entries.empty()) fail_data("classify_fss: empty curve");

  double sup_est = 0.0;
  bool some_exceeds = false, all_near_one = true;
  for (const auto& e : curve.entries) {
    sup_est = std::max(sup_est, e.modulation);
    if (e.modulation > 1.0 + 3.0 * e.se) some_exceeds = true;
    if (std::fabs(e.modulation - 1.0) > 3.0 * e.se) all_near_one = false;
  }

  FSSClass out;
  if (analytic_limit && std::isinf(*analytic_limit)) {
    out.label = FSSLabel::smeary;
    out.limit_modulation = kInf;
    out.sup_modulation = kInf;
    return out;
  }
  const double se_last = curve.entries.back().se;
  const double limit =
      analytic_limit ? *analytic_limit : curve.entries.back().modulation;
  out.limit_modulation = limit;
  out.sup_modulation = std::max(sup_est, limit);

  if (limit > 1.0 + 3.0 * se_last) {
    out.label = FSSLabel::type_one;
  } else if (some_exceeds && std::fabs(limit - 1.0) <= 3.0 * se_last) {
    out.label = FSSLabel::type_two;
  } else if (all_near_one && std::fabs(limit - 1.0) <= 3.0 * se_last) {
    out.label = FSSLabel::euclidean;
  } else {
    out.label = FSSLabel::inconclusive;
    std::ostringstream d;
    d << "conflicting evidence: terminal estimate " << limit
      << " is neither confidently above 1 nor within 3 se of 1"
      << (some_exceeds ? " while interior entries exceed 1" : "");
    out.diagnostics = d.str();
  }
  return out;
}

RegimeFit fit_regimes(const ModulationCurve& curve) {
  const auto& es = curve.entries;
  if (es.size() < 8)
    fail_data("fit_regimes: curve needs at least 8 entries");
  for (std::size_t i = 1; i < es.size(); ++i)
    if (es[i].n <= es[i - 1].n)
      fail_data("fit_regimes: entries must be strictly increasing in n");
  if (es.back().n < 100 * es.front().n)
    fail_data("fit_regimes: curve must span at least two decades in n");

  const std::size_t N = es.size();
  std::vector<double> x(N), y(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (!(es[i].modulation > 0.0))
      fail_data("fit_regimes: nonpositive modulation entry");
    x[i] = std::log(static_cast<double>(es[i].n));
    y[i] = std::log(es[i].modulation);
  }

  std::size_t i_minus = N;
  for (std::size_t i = 0; i < N; ++i)
    if (es[i].modulation > 1.0 + 3.0 * es[i].se && es[i].n > 1) {
      i_minus = i;
      break;
    }
  if (i_minus >= N - 1) fail_numeric("fit_regimes: no FSS regime detected");

  auto slope = [&](std::size_t i) {
    return (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  };

  // Initial rising run for the central exponent.
  std::size_t run_end = i_minus;
  while (run_end + 1 < N && slope(run_end) > 0.0) ++run_end;
  if (run_end == i_minus) fail_numeric("fit_regimes: no FSS regime detected");

  auto fit_line = [&](std::size_t a, std::size_t b, double& alpha,
                      double& intercept, double& alpha_se, double& rms) {
    const double k = static_cast<double>(b - a + 1);
    double sx = 0, sy = 0;
    for (std::size_t i = a; i <= b; ++i) {
      sx += x[i];
      sy += y[i];
    }
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0;
    for (std::size_t i = a; i <= b; ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    alpha = sxy / sxx;
    intercept = my - alpha * mx;
    double ssr = 0;
    for (std::size_t i = a; i <= b; ++i) {
      const double r = y[i] - (intercept + alpha * x[i]);
      ssr += r * r;
    }
    rms = std::sqrt(ssr / k);
    alpha_se = k > 2 ? std::sqrt(ssr / (k - 2) / sxx) : 0.0;
  };

  double alpha_hat, intercept, alpha_se, rms;
  fit_line(i_minus, run_end, alpha_hat, intercept, alpha_se, rms);
  double alpha_minus = std::clamp(alpha_hat - 2.0 * alpha_se, 1e-6, 1.0 - 2e-6);
  double alpha_plus = std::clamp(alpha_hat + 2.0 * alpha_se, 1e-6, 1.0 - 1e-6);
  if (alpha_plus <= alpha_minus) alpha_plus = alpha_minus + 1e-6;

  // Extend to the last entry whose forward log-log slope stays above
  // alpha_minus / 2.
  std::size_t i_plus = i_minus;
  while (i_plus + 1 < N && slope(i_plus) >= 0.5 * alpha_minus) ++i_plus;
  if (i_plus <= i_minus) fail_numeric("fit_regimes: no FSS regime detected");

  double c_minus = 0.0, c_plus = 0.0;
  for (int guard = 0; guard < 200; ++guard) {
    c_minus = std::numeric_limits<double>::infinity();
    c_plus = 0.0;
    for (std::size_t i = i_minus; i <= i_plus; ++i) {
      c_minus = std::min(c_minus,
                         es[i].modulation /
                             std::pow(static_cast<double>(es[i].n), alpha_minus));
      c_plus = std::max(c_plus,
                        es[i].modulation /
                            std::pow(static_cast<double>(es[i].n), alpha_plus));
    }
    const bool lower_ok =
        c_minus * std::pow(static_cast<double>(es[i_minus].n), alpha_minus) > 1.0;
    const bool compat_ok =
        c_plus * std::pow(static_cast<double>(es[i_minus].n), alpha_plus) <=
        c_minus * std::pow(static_cast<double>(es[i_plus].n), alpha_minus) + 1e-12;
    if (lower_ok && compat_ok) break;
    if (!lower_ok)
      ++i_minus;
    else
      --i_plus;
    if (i_plus <= i_minus)
      fail_numeric("fit_regimes: regime collapsed while enforcing the bounds");
  }

  double tail_max = 0.0;
  for (std::size_t i = i_plus + 1; i < N; ++i)
    tail_max = std::max(tail_max, es[i].modulation);
  if (tail_max == 0.0) tail_max = es[i_plus].modulation;

  RegimeFit fit;
  fit.c_minus = c_minus;
  fit.c_plus = c_plus;
  fit.alpha_minus = alpha_minus;
  fit.alpha_plus = alpha_plus;
  fit.n_minus = es[i_minus].n;
  fit.n_plus = es[i_plus].n;
  fit.n_zero = (i_plus + 1 < N) ? es[i_plus + 1].n : es[i_plus].n + 1;
  fit.k_bound = 1.05 * tail_max;
  fit.residual = rms;
  return fit;
}

}  // namespace fss
