#ifndef FSS_SPECIAL_HPP
#define FSS_SPECIAL_HPP

namespace fss {

// Modified Bessel function of the first kind, order zero. Power series for
// moderate arguments, asymptotic expansion beyond; absolute accuracy is far
// below 1e-12 over the concentration range used here.
double bessel_i0(double x);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a),
// a > 0, x >= 0. Series/continued-fraction evaluation, absolute error
// below 1e-12.
double regularized_gamma_upper(double a, double x);

// Upper tail P(X > x) of a chi-squared variable with dof degrees of freedom.
double chi_squared_upper_tail(double x, int dof);

// Surface area of the unit sphere S^m embedded in R^{m+1}.
double sphere_surface_area(int m);

}  // namespace fss

#endif
