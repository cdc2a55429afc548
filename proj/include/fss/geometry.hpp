#ifndef FSS_GEOMETRY_HPP
#define FSS_GEOMETRY_HPP

#include <span>
#include <vector>

namespace fss {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Wraps an angle into [-pi, pi); +pi maps to -pi (the two are identified).
double wrap_angle(double a);

// A point on the unit sphere S^m. The circle (m = 1) is stored as an angle in
// [-pi, pi); higher-dimensional spheres as unit vectors in R^{m+1} with the
// north pole at (1, 0, ..., 0).
class SpherePoint {
 public:
  static SpherePoint circle(double angle);
  // Requires |norm - 1| <= 1e-12; use embedded_normalized for noisy input.
  static SpherePoint embedded(std::vector<double> coords);
  // Accepts |norm - 1| <= 1e-6 and rescales to exact unit length.
  static SpherePoint embedded_normalized(std::vector<double> coords);
  static SpherePoint north_pole(int m);

  int dim() const { return m_; }
  bool is_circle() const { return m_ == 1; }
  double angle() const;
  const std::vector<double>& coords() const;

  bool operator==(const SpherePoint& other) const = default;

 private:
  SpherePoint(int m, std::vector<double> c) : m_(m), c_(std::move(c)) {}
  int m_ = 1;
  std::vector<double> c_;  // {angle} for m=1, unit vector otherwise
};

// Tangent vector in normal coordinates at `base`: length-m coefficient vector
// with respect to the deterministic orthonormal basis of tangent_basis(base).
struct TangentVector {
  SpherePoint base;
  std::vector<double> coords;

  double norm() const;
};

// Polar form (theta, sin(theta) q) of a sphere point: theta in [0, pi] is the
// distance from the north pole, q a unit vector on S^{m-1}. The direction is
// undefined at the poles; those decompose to (1, 0, ..., 0) with the
// degenerate flag set.
struct PolarPoint {
  double theta = 0.0;
  std::vector<double> direction;
  bool degenerate = false;
};

// Geodesic (arc) distance in [0, pi].
double geodesic_distance(const SpherePoint& x, const SpherePoint& y);

// Deterministic orthonormal basis of the tangent space at `base` (m >= 2),
// built by Gram-Schmidt from the canonical axes of R^{m+1}. Row k is the k-th
// basis vector.
std::vector<std::vector<double>> tangent_basis(const SpherePoint& base);

// Riemannian log map; undefined at the cut locus (antipode of base).
TangentVector log_map(const SpherePoint& base, const SpherePoint& x);

// Riemannian exp map; requires |v| <= pi.
SpherePoint exp_map(const SpherePoint& base, const std::vector<double>& coords);
SpherePoint exp_map(const TangentVector& v);

PolarPoint polar_decompose(const SpherePoint& x);
SpherePoint polar_compose(const PolarPoint& p, int m);

namespace detail {

// Ambient-space helpers used by the optimizer hot paths; vectors are raw
// unit vectors of length m+1.
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double ambient_distance(std::span<const double> a, std::span<const double> b);

// Writes the ambient log vector log_base(x) (length m+1, tangent at base)
// into out. Returns the geodesic distance.
double ambient_log(std::span<const double> base, std::span<const double> x,
                   std::span<double> out);

// In-place exp along tangent vector t (ambient, assumed orthogonal to base);
// result is normalized to unit length.
void ambient_exp(std::span<const double> base, std::span<const double> t,
                 double scale, std::span<double> out);

// Parallel transport matrix along the geodesic from p to q as an
// (m+1) x (m+1) row-major ambient matrix.
std::vector<double> transport_matrix(std::span<const double> p,
                                     std::span<const double> q);

}  // namespace detail

}  // namespace fss

#endif
