#ifndef FSS_FRECHET_HPP
#define FSS_FRECHET_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fss/distributions.hpp"
#include "fss/geometry.hpp"

namespace fss {

struct FrechetMeanResult {
  SpherePoint mean = SpherePoint::circle(0.0);
  double value = 0.0;            // F_n at the mean
  long candidates_evaluated = 0; // circle candidates or optimizer seeds
  bool tie_flag = false;
  double gradient_norm = 0.0;
};

struct FrechetMeanOptions {
  // S^m optimizer controls; the circle uses the exact candidate method.
  int grid_seeds = 32;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-10;
  double step = 0.5;
  double tie_tolerance = 1e-12;
  // When set, run a single descent from this point and return the local
  // minimizer of its basin (the local Frechet mean near a known center).
  std::optional<SpherePoint> localize_at;
  // Stream key for breaking exact ties uniformly at random.
  std::uint64_t tie_break_seed = 0;
};

// Mean squared geodesic distance from p to the sample.
double frechet_function(const Sample& sample, const SpherePoint& p);

// Sample Frechet mean. On the circle this is the exact global minimizer via
// the candidate method (all local minimizers have the form mean + 2*pi*k/n);
// on S^m a Riemannian gradient descent from screened deterministic seeds.
FrechetMeanResult frechet_mean(const Sample& sample,
                               const FrechetMeanOptions& options = {});

// Covariance (1/n normalization) of the log-map coordinates of the sample in
// the chart at `base`. Errors if any point is antipodal to the base.
Eigen::MatrixXd empirical_tangent_covariance(const Sample& sample,
                                             const SpherePoint& base);

struct ModulationEntry {
  long n = 0;
  double modulation = 0.0;
  double se = 0.0;
  long replicates = 0;
};

// The map n -> n * E[d(mean_n, mean)^2] / V, estimated per grid point.
struct ModulationCurve {
  std::vector<ModulationEntry> entries;  // strictly increasing in n
};

// Monte Carlo estimate of the modulation curve: for each n, R independent
// samples, a Frechet mean each, and the rescaled mean squared distance to the
// population mean. Deterministic for fixed seed, any thread count. At n = 1
// the sample mean is the single observation, so the modulation is 1 by
// construction and is reported exactly.
ModulationCurve monte_carlo_modulation(const DistributionSpec& spec,
                                       std::vector<long> n_grid,
                                       long replicates, std::uint64_t seed,
                                       int threads = 1);

struct BootstrapModulationResult {
  double estimate = 0.0;
  double se = 0.0;
  long n = 0;
  long replicates = 0;
};

// n-out-of-n bootstrap estimate of the modulation of a single sample,
// normalized by the trace of the empirical tangent covariance at the sample
// mean.
BootstrapModulationResult bootstrap_modulation(const Sample& sample, long B,
                                               std::uint64_t seed,
                                               int threads = 1);

namespace detail {

struct CircleMeanResult {
  double angle = 0.0;
  double value = 0.0;
  bool tie = false;
  double gradient_norm = 0.0;
};

// Exact circular Frechet mean in O(n log n) via sorted prefix sums.
CircleMeanResult circle_frechet_mean(std::vector<double> angles,
                                     std::uint64_t tie_break_seed,
                                     double tie_tolerance = 1e-12);

}  // namespace detail

}  // namespace fss

#endif
