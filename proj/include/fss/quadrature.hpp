#ifndef FSS_QUADRATURE_HPP
#define FSS_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <functional>

#include "fss/error.hpp"

namespace fss {

// Adaptive Simpson integration with an absolute tolerance. Real is double or
// long double; the long double instantiation is used where second differences
// of the result are taken afterwards. Depth 20 corresponds to the panel cap
// of 2^20 subintervals.
template <typename Real, typename F>
Real adaptive_simpson(const F& f, Real a, Real b, Real tol, int max_depth = 20) {
  struct Impl {
    const F& f;
    int max_depth;
    bool depth_hit = false;

    Real simpson(Real a, Real b, Real fa, Real fm, Real fb) {
      return (b - a) / 6 * (fa + 4 * fm + fb);
    }

    Real run(Real a, Real b, Real fa, Real fm, Real fb, Real whole, Real tol,
             int depth) {
      const Real m = (a + b) / 2;
      const Real lm = (a + m) / 2, rm = (m + b) / 2;
      const Real flm = f(lm), frm = f(rm);
      if (std::isnan(static_cast<double>(flm)) ||
          std::isnan(static_cast<double>(frm)))
        fail_numeric("quadrature: integrand evaluated to NaN");
      const Real left = simpson(a, m, fa, flm, fm);
      const Real right = simpson(m, b, fm, frm, fb);
      const Real delta = left + right - whole;
      if (depth >= max_depth) {
        depth_hit = std::abs(delta) > 15 * tol;
        return left + right + delta / 15;
      }
      if (std::abs(delta) <= 15 * tol)
        return left + right + delta / 15;
      return run(a, m, fa, flm, fm, left, tol / 2, depth + 1) +
             run(m, b, fm, frm, fb, right, tol / 2, depth + 1);
    }
  };

  if (a == b) return Real(0);
  Impl impl{f, max_depth};
  const Real fa = f(a), fb = f(b), fm = f((a + b) / 2);
  if (std::isnan(static_cast<double>(fa)) || std::isnan(static_cast<double>(fb)) ||
      std::isnan(static_cast<double>(fm)))
    fail_numeric("quadrature: integrand evaluated to NaN at panel node");
  const Real whole = impl.simpson(a, b, fa, fm, fb);
  const Real result = impl.run(a, b, fa, fm, fb, whole, tol, 0);
  if (impl.depth_hit)
    fail_numeric("quadrature: tolerance not reached within panel cap");
  return result;
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-11) {
  return adaptive_simpson<double>(f, a, b, tol);
}

}  // namespace fss

#endif
