#ifndef FSS_DISTRIBUTIONS_HPP
#define FSS_DISTRIBUTIONS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fss/geometry.hpp"
#include "fss/rng.hpp"

namespace fss {

// --- Spec types -------------------------------------------------------------

struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;  // lo <= hi, both within [-pi, pi]
};

struct VonMisesCircle {
  double mu = 0.0;
  double kappa = 0.0;
};

struct ConditionedVonMises {
  double mu = 0.0;
  double kappa = 0.0;
  std::vector<AngleInterval> support;  // disjoint, positive total length
};

// Mean fixed at the north pole of S^m.
struct VonMisesFisher {
  int m = 2;
  double kappa = 0.0;
};

struct TwoPointCircle {
  double a = 0.0;
  double b = 0.0;
  double w = 0.5;  // probability of a
};

// Mass alpha spread uniformly over the ring at polar angle theta, mass
// 1 - alpha at the north pole.
struct RingMixture {
  int m = 2;
  double theta = 1.0;  // in (0, pi)
  double alpha = 0.5;
};

struct MixingAtom {
  double theta = 0.0;
  double weight = 0.0;
};

// Distribution of the polar angle for rotationally symmetric laws: point
// masses plus an optional tabulated density on [0, pi] (linear interpolation
// between nodes). Total mass must be 1 within 1e-10.
struct MixingMeasure {
  std::vector<MixingAtom> atoms;
  std::vector<double> density_theta;  // ascending nodes in [0, pi]
  std::vector<double> density_value;  // nonnegative values at the nodes

  bool has_density() const { return density_theta.size() >= 2; }
  double atom_mass() const;
  double density_mass() const;  // by quadrature of the interpolant
};

struct RotSym {
  int m = 2;
  MixingMeasure mixing;
};

using DistributionSpec = std::variant<VonMisesCircle, ConditionedVonMises,
                                      VonMisesFisher, TwoPointCircle,
                                      RingMixture, RotSym>;

// Validates invariants (probabilities, interval layout, mixing mass) and
// throws a data error on violation.
void validate_spec(const DistributionSpec& spec);

int spec_dim(const DistributionSpec& spec);

// Symmetry center of the spec: mu on the circle, the north pole on S^m.
SpherePoint spec_center(const DistributionSpec& spec);

DistributionSpec spec_from_json(const std::string& text);
std::string spec_to_json(const DistributionSpec& spec);

// --- Samples ----------------------------------------------------------------

// An ordered i.i.d. sample on S^m. Stored flat: n angles for m = 1, n rows of
// m+1 ambient coordinates otherwise.
class Sample {
 public:
  static Sample circle(std::vector<double> angles);
  static Sample embedded(int m, std::vector<double> flat);

  int dim() const { return m_; }
  long size() const { return n_; }
  std::size_t row_len() const { return m_ == 1 ? 1 : static_cast<std::size_t>(m_) + 1; }

  double angle(long i) const { return data_[static_cast<std::size_t>(i)]; }
  std::span<const double> vec(long i) const {
    const std::size_t w = row_len();
    return {data_.data() + static_cast<std::size_t>(i) * w, w};
  }
  SpherePoint point(long i) const;
  std::span<const double> raw() const { return data_; }
  const std::vector<double>& angles() const;

 private:
  Sample(int m, long n, std::vector<double> data)
      : m_(m), n_(n), data_(std::move(data)) {}
  int m_ = 1;
  long n_ = 0;
  std::vector<double> data_;
};

// --- Sampling ---------------------------------------------------------------

// Immutable sampler with precomputed tables (inverse-CDF grids, rejection
// envelopes). Thread-safe: drawing only mutates the caller's stream.
class Sampler {
 public:
  explicit Sampler(DistributionSpec spec);
  ~Sampler();
  Sampler(Sampler&&) noexcept;
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  const DistributionSpec& spec() const;
  int dim() const;

  SpherePoint draw(RandomStream& rs) const;
  // Point j of the sample is drawn from the substream (seed, stream, j).
  Sample draw_n(long n, std::uint64_t seed, std::uint64_t stream) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around Sampler::draw_n.
Sample sample(const DistributionSpec& spec, long n, std::uint64_t seed,
              std::uint64_t stream = 0);

// --- Densities and moments --------------------------------------------------

// Density w.r.t. the uniform surface measure; defined for the von Mises,
// conditioned von Mises and von Mises-Fisher families only.
double density(const DistributionSpec& spec, const SpherePoint& x);

// Density at the antipode of the center, for circle specs whose density is
// continuous near it. Atomic circle specs with no mass near the antipode
// report 0.
double antipodal_density(const DistributionSpec& spec);

struct PopulationSummary {
  SpherePoint mean;      // the symmetry center
  double variance = 0.0; // E d(X, mean)^2
  // True when the center is the unique global minimizer of the population
  // Frechet function. False when it is a strict local minimizer that is tied
  // with, or beaten by, a remote competitor (possible for ring-like laws on
  // S^m); downstream Monte Carlo then studies the local mean near the center.
  bool unique_global = true;
};

PopulationSummary population_mean_and_variance(const DistributionSpec& spec);

namespace detail {

// Linear interpolation of a tabulated density; 0 outside the node range.
double interp_density(const std::vector<double>& xs,
                      const std::vector<double>& ys, double x);

// Integrals against the polar-angle law of a rotationally symmetric spec
// (RingMixture, RotSym, VonMisesFisher): atoms exactly, densities by
// adaptive quadrature at the given tolerance. f must be finite on [0, pi];
// pass a coarser tolerance when f itself carries quadrature noise.
double mixing_expectation(const DistributionSpec& spec,
                          const std::function<double(double)>& f,
                          double tol = 1e-11);

}  // namespace detail

}  // namespace fss

#endif
