#include "fss/special.hpp"

#include <cmath>
#include <limits>

#include "fss/error.hpp"

namespace fss {

double bessel_i0(double x) {
  x = std::fabs(x);
  if (x < 18.0) {
    // sum_k (x^2/4)^k / (k!)^2
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-18) break;
    }
    return sum;
  }
  // Asymptotic expansion I0(x) ~ e^x / sqrt(2 pi x) * sum_k a_k / x^k
  const double inv = 1.0 / x;
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 12; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd * inv / (8.0 * k);
    sum += term;
  }
  return std::exp(x) * sum / std::sqrt(2.0 * M_PI * x);
}

namespace {

// Lower incomplete gamma P(a,x) by series, for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  fail_numeric("incomplete gamma series did not converge");
}

// Upper incomplete gamma Q(a,x) by Lentz continued fraction, for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16)
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  fail_numeric("incomplete gamma continued fraction did not converge");
}

}  // namespace

double regularized_gamma_upper(double a, double x) {
  if (a <= 0.0) fail_usage("regularized_gamma_upper: a must be positive");
  if (x < 0.0) fail_usage("regularized_gamma_upper: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_squared_upper_tail(double x, int dof) {
  if (dof < 1) fail_usage("chi_squared_upper_tail: dof must be >= 1");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_upper(0.5 * dof, 0.5 * x);
}

double sphere_surface_area(int m) {
  if (m < 0) fail_usage("sphere_surface_area: dimension must be nonnegative");
  const double k = 0.5 * (m + 1);
  return 2.0 * std::pow(M_PI, k) / std::tgamma(k);
}

}  // namespace fss
