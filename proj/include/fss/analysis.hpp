#ifndef FSS_ANALYSIS_HPP
#define FSS_ANALYSIS_HPP

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "fss/distributions.hpp"
#include "fss/frechet.hpp"

namespace fss {

// Limit of the modulation on the circle when the density at the antipode of
// the mean is f_pi: 1 / (1 - 2 pi f_pi)^2 for 2 pi f_pi < 1, +infinity at
// equality. Values beyond are outside the covered regime and error.
double circle_limit_modulation(double f_pi);

// Mean squared distance from the point at polar angle psi to the uniform
// ring at polar angle theta on S^m:
//   F_theta(psi) = int |sin phi|^{m-2} a^2(psi, theta, phi) dphi
//               / int |sin phi|^{m-2} dphi,
//   a = arccos(cos psi cos theta + sin psi sin theta cos phi).
// Even in psi; evaluated with long double quadrature so that second
// differences in psi remain meaningful.
double ring_frechet_function(int m, double theta, double psi);

// h(theta) = 1/m + ((m-1)/m) theta cot theta, the scalar with
// Hess F_theta(0) = 2 h(theta) Id. Returns the limit values 1 at theta = 0
// and -infinity at theta = pi.
double ring_hessian_coefficient(int m, double theta);

// Hessian of the Frechet function at the center for a rotationally symmetric
// law with the given polar mixing measure: 2 Id * E[h(theta)]. Errors when
// the integral diverges (mass at the antipode).
Eigen::MatrixXd rotsym_hessian(int m, const MixingMeasure& mixing);

struct CLTResult {
  int m = 1;
  Eigen::MatrixXd hessian;         // H, m x m
  Eigen::MatrixXd sigma;           // covariance of the log-mapped law
  Eigen::MatrixXd asymptotic_cov;  // 4 H^{-1} Sigma H^{-1}
  double limit_modulation = 0.0;   // trace(asymptotic_cov) / V
  double population_variance = 0.0;
};

// Asymptotic covariance of the sample Frechet mean and the implied limit of
// the modulation. Supports rotationally symmetric specs on S^m and circle
// specs with a density near the antipode.
CLTResult clt_analysis(const DistributionSpec& spec);

struct RingSearchResult {
  int m = 2;
  double target = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  double achieved_limit = 0.0;
};

// Searches ring mixtures on S^m for a limit modulation above `target`,
// scanning theta in (pi/2, pi) and alpha in (0, 1). Returns the first grid
// pair above the target.
RingSearchResult ring_mixture_search(int m, double target);

// Smallest theta with h(theta) < 0, i.e. the root of
// theta cot theta = -1/(m-1) in (pi/2, pi).
double ring_feasibility_threshold(int m);

enum class FSSLabel { euclidean, type_one, type_two, smeary, inconclusive };

std::string fss_label_name(FSSLabel label);

struct FSSClass {
  FSSLabel label = FSSLabel::inconclusive;
  double limit_modulation = 0.0;  // +infinity for smeary
  double sup_modulation = 0.0;
  std::string diagnostics;
};

// Classifies a modulation curve, optionally using an analytic limit. The
// smeary label is only ever produced from an infinite analytic limit, never
// inferred from finite data.
FSSClass classify_fss(const ModulationCurve& curve,
                      std::optional<double> analytic_limit = std::nullopt);

struct RegimeFit {
  double c_minus = 0.0, c_plus = 0.0;
  double alpha_minus = 0.0, alpha_plus = 0.0;
  long n_minus = 0, n_plus = 0, n_zero = 0;
  double k_bound = 0.0;
  double residual = 0.0;
};

// Fits the rising (power-law) regime of a modulation curve:
// C- n^{alpha-} <= m_n <= C+ n^{alpha+} on [n-, n+], m_n <= K from n0 on.
RegimeFit fit_regimes(const ModulationCurve& curve);

namespace detail {

// ring_frechet_function at a caller-chosen quadrature tolerance. Looser
// tolerances keep kink configurations (psi + theta = pi) inside the panel
// cap; used by qualitative profile scans.
double ring_frechet_function_tol(int m, double theta, double psi,
                                 long double tol);

// theta * cot(theta), series below 1e-4 to avoid cancellation.
double theta_cot_theta(double theta);

// E[h(theta)] under the polar mixing law of a rotationally symmetric spec
// (RingMixture, RotSym, VonMisesFisher), with the cot singularity at pi
// cancelled symbolically where the density vanishes.
double hessian_coefficient(const DistributionSpec& spec);

}  // namespace detail

}  // namespace fss

#endif
