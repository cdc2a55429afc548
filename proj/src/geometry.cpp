#include "fss/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "fss/error.hpp"

namespace fss {

double wrap_angle(double a) {
  double r = std::fmod(a + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r - kPi;
}

SpherePoint SpherePoint::circle(double angle) {
  if (!std::isfinite(angle)) fail_data("circle point: angle is not finite");
  return SpherePoint(1, {wrap_angle(angle)});
}

SpherePoint SpherePoint::embedded(std::vector<double> coords) {
  if (coords.size() < 3)
    fail_data("embedded sphere point needs at least 3 coordinates (m >= 2)");
  const double n = detail::norm(coords);
  if (std::fabs(n - 1.0) > 1e-12)
    fail_data("embedded sphere point is not a unit vector");
  const int m = static_cast<int>(coords.size()) - 1;
  return SpherePoint(m, std::move(coords));
}

SpherePoint SpherePoint::embedded_normalized(std::vector<double> coords) {
  if (coords.size() < 3)
    fail_data("embedded sphere point needs at least 3 coordinates (m >= 2)");
  const double n = detail::norm(coords);
  if (!(n > 0.0) || std::fabs(n - 1.0) > 1e-6)
    fail_data("vector norm deviates from 1 by more than 1e-6");
  for (double& c : coords) c /= n;
  const int m = static_cast<int>(coords.size()) - 1;
  return SpherePoint(m, std::move(coords));
}

SpherePoint SpherePoint::north_pole(int m) {
  if (m < 1) fail_usage("sphere dimension must be >= 1");
  if (m == 1) return circle(0.0);
  std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
  c[0] = 1.0;
  return SpherePoint(m, std::move(c));
}

double SpherePoint::angle() const {
  if (m_ != 1) fail_usage("angle() is only defined on the circle");
  return c_[0];
}

const std::vector<double>& SpherePoint::coords() const {
  if (m_ == 1) fail_usage("coords() is only defined for m >= 2");
  return c_;
}

double TangentVector::norm() const { return detail::norm(coords); }

double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  if (x.dim() != y.dim())
    fail_data("geodesic_distance: dimension mismatch");
  if (x.is_circle()) {
    const double d = std::fabs(y.angle() - x.angle());
    return std::min(d, kTwoPi - d);
  }
  return detail::ambient_distance(x.coords(), y.coords());
}

std::vector<std::vector<double>> tangent_basis(const SpherePoint& base) {
  if (base.is_circle())
    fail_usage("tangent_basis: the circle chart is the identity on angles");
  const auto& p = base.coords();
  const std::size_t d = p.size();
  std::vector<std::vector<double>> basis;
  basis.reserve(d - 1);
  for (std::size_t axis = 0; axis < d && basis.size() < d - 1; ++axis) {
    std::vector<double> v(d, 0.0);
    v[axis] = 1.0;
    double c = detail::dot(v, p);
    for (std::size_t i = 0; i < d; ++i) v[i] -= c * p[i];
    for (const auto& b : basis) {
      const double cb = detail::dot(v, b);
      for (std::size_t i = 0; i < d; ++i) v[i] -= cb * b[i];
    }
    const double n = detail::norm(v);
    if (n < 1e-6) continue;
    for (double& vi : v) vi /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

TangentVector log_map(const SpherePoint& base, const SpherePoint& x) {
  if (base.dim() != x.dim()) fail_data("log_map: dimension mismatch");
  const double d = geodesic_distance(base, x);
  if (d > kPi - 1e-12)
    fail_numeric("log_map: point at the cut locus of the base");
  if (base.is_circle())
    return TangentVector{base, {wrap_angle(x.angle() - base.angle())}};

  const auto& p = base.coords();
  const auto& q = x.coords();
  const std::size_t n = p.size();
  std::vector<double> ambient(n, 0.0);
  if (d > 0.0) {
    const double c = std::cos(d);
    double un = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ambient[i] = q[i] - c * p[i];
      un += ambient[i] * ambient[i];
    }
    un = std::sqrt(un);
    if (un > 0.0) {
      const double s = d / un;
      for (double& a : ambient) a *= s;
    }
  }
  const auto basis = tangent_basis(base);
  std::vector<double> coords(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    coords[k] = detail::dot(ambient, basis[k]);
  return TangentVector{base, std::move(coords)};
}

SpherePoint exp_map(const SpherePoint& base, const std::vector<double>& coords) {
  const std::size_t m = static_cast<std::size_t>(base.dim());
  if (coords.size() != m) fail_data("exp_map: tangent coordinate length mismatch");
  const double r = detail::norm(coords);
  if (r > kPi + 1e-12)
    fail_numeric("exp_map: tangent vector longer than pi");
  if (base.is_circle()) return SpherePoint::circle(base.angle() + coords[0]);

  const auto basis = tangent_basis(base);
  const auto& p = base.coords();
  std::vector<double> t(p.size(), 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += coords[k] * basis[k][i];
  std::vector<double> out(p.size());
  detail::ambient_exp(p, t, 1.0, out);
  return SpherePoint::embedded(std::move(out));
}

SpherePoint exp_map(const TangentVector& v) { return exp_map(v.base, v.coords); }

PolarPoint polar_decompose(const SpherePoint& x) {
  if (x.is_circle()) {
    const double a = x.angle();
    PolarPoint p;
    p.theta = std::fabs(a);
    p.direction = {a >= 0.0 ? 1.0 : -1.0};
    p.degenerate = (p.theta < 1e-12) || (p.theta > kPi - 1e-12);
    return p;
  }
  const auto& c = x.coords();
  const std::size_t m = c.size() - 1;
  PolarPoint p;
  p.theta = std::acos(std::clamp(c[0], -1.0, 1.0));
  const double s = std::sin(p.theta);
  p.direction.assign(m, 0.0);
  if (s < 1e-9) {
    p.direction[0] = 1.0;
    p.degenerate = true;
    return p;
  }
  double n = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    p.direction[i] = c[i + 1] / s;
    n += p.direction[i] * p.direction[i];
  }
  n = std::sqrt(n);
  for (double& q : p.direction) q /= n;
  return p;
}

SpherePoint polar_compose(const PolarPoint& p, int m) {
  if (m < 1) fail_usage("polar_compose: dimension must be >= 1");
  if (p.theta < -1e-12 || p.theta > kPi + 1e-12)
    fail_data("polar_compose: theta outside [0, pi]");
  if (p.direction.size() != static_cast<std::size_t>(m))
    fail_data("polar_compose: direction length must equal m");
  const double theta = std::clamp(p.theta, 0.0, kPi);
  if (m == 1) return SpherePoint::circle(theta * p.direction[0]);
  const double n = detail::norm(p.direction);
  if (std::fabs(n - 1.0) > 1e-12)
    fail_data("polar_compose: direction is not a unit vector");
  std::vector<double> c(static_cast<std::size_t>(m) + 1);
  c[0] = std::cos(theta);
  const double s = std::sin(theta);
  for (int i = 0; i < m; ++i) c[static_cast<std::size_t>(i) + 1] = s * p.direction[static_cast<std::size_t>(i)];
  return SpherePoint::embedded_normalized(std::move(c));
}

namespace detail {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double ambient_distance(std::span<const double> a, std::span<const double> b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

double ambient_log(std::span<const double> base, std::span<const double> x,
                   std::span<double> out) {
  const double d = ambient_distance(base, x);
  if (d == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return 0.0;
  }
  const double c = std::cos(d);
  double un = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x[i] - c * base[i];
    un += out[i] * out[i];
  }
  un = std::sqrt(un);
  const double s = un > 0.0 ? d / un : 0.0;
  for (double& o : out) o *= s;
  return d;
}

void ambient_exp(std::span<const double> base, std::span<const double> t,
                 double scale, std::span<double> out) {
  double r = 0.0;
  for (const double ti : t) r += ti * ti;
  r = std::sqrt(r) * std::fabs(scale);
  if (r == 0.0) {
    std::copy(base.begin(), base.end(), out.begin());
    return;
  }
  const double c = std::cos(r), s = std::sin(r) / r * scale;
  double n = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = c * base[i] + s * t[i];
    n += out[i] * out[i];
  }
  n = std::sqrt(n);
  for (double& o : out) o /= n;
}

std::vector<double> transport_matrix(std::span<const double> p,
                                     std::span<const double> q) {
  const std::size_t d = p.size();
  std::vector<double> R(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) R[i * d + i] = 1.0;
  const double alpha = ambient_distance(p, q);
  if (alpha < 1e-15) return R;
  if (alpha > kPi - 1e-12)
    fail_numeric("transport_matrix: endpoints are antipodal");
  // Unit tangent at p pointing toward q.
  std::vector<double> e(d);
  const double c = std::cos(alpha), s = std::sin(alpha);
  for (std::size_t i = 0; i < d; ++i) e[i] = (q[i] - c * p[i]) / s;
  // Rotation by alpha in the (p, e) plane, identity on the complement.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      R[i * d + j] += s * (e[i] * p[j] - p[i] * e[j]) +
                      (c - 1.0) * (p[i] * p[j] + e[i] * e[j]);
  return R;
}

}  // namespace detail

}  // namespace fss
