#include "fss/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "fss/analysis.hpp"
#include "fss/error.hpp"
#include "fss/quadrature.hpp"
#include "fss/special.hpp"

namespace fss {

namespace {

using ordered_json = nlohmann::ordered_json;

bool in_support(const std::vector<AngleInterval>& support, double angle) {
  for (const auto& iv : support)
    if (angle >= iv.lo - 1e-12 && angle <= iv.hi + 1e-12) return true;
  return false;
}

double von_mises_density(double mu, double kappa, double x) {
  return std::exp(kappa * std::cos(x - mu)) / (kTwoPi * bessel_i0(kappa));
}

// Mass of the support under the unconditioned von Mises law.
double support_mass(const ConditionedVonMises& s) {
  double mass = 0.0;
  for (const auto& iv : s.support)
    mass += integrate(
        [&](double x) { return von_mises_density(s.mu, s.kappa, x); }, iv.lo,
        iv.hi, 1e-12);
  return mass;
}

}  // namespace

// --- Validation ---------------------------------------------------------

double MixingMeasure::atom_mass() const {
  double w = 0.0;
  for (const auto& a : atoms) w += a.weight;
  return w;
}

double MixingMeasure::density_mass() const {
  if (!has_density()) return 0.0;
  // Exact for the piecewise-linear interpolant.
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < density_theta.size(); ++i)
    mass += 0.5 * (density_value[i] + density_value[i + 1]) *
            (density_theta[i + 1] - density_theta[i]);
  return mass;
}

void validate_spec(const DistributionSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, VonMisesCircle>) {
          if (!std::isfinite(s.mu) || !std::isfinite(s.kappa) || s.kappa < 0.0)
            fail_data("von_mises: kappa must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, ConditionedVonMises>) {
          if (!std::isfinite(s.mu) || !std::isfinite(s.kappa) || s.kappa < 0.0)
            fail_data("conditioned_von_mises: kappa must be finite and >= 0");
          if (s.support.empty())
            fail_data("conditioned_von_mises: support must be nonempty");
          auto ivs = s.support;
          std::sort(ivs.begin(), ivs.end(),
                    [](const auto& a, const auto& b) { return a.lo < b.lo; });
          double total = 0.0;
          for (std::size_t i = 0; i < ivs.size(); ++i) {
            if (!(ivs[i].lo <= ivs[i].hi))
              fail_data("conditioned_von_mises: interval with lo > hi");
            if (ivs[i].lo < -kPi - 1e-9 || ivs[i].hi > kPi + 1e-9)
              fail_data("conditioned_von_mises: interval outside [-pi, pi]");
            if (i > 0 && ivs[i].lo < ivs[i - 1].hi - 1e-12)
              fail_data("conditioned_von_mises: intervals overlap");
            total += ivs[i].hi - ivs[i].lo;
          }
          if (!(total > 0.0))
            fail_data("conditioned_von_mises: support has zero total length");
        } else if constexpr (std::is_same_v<T, VonMisesFisher>) {
          if (s.m < 2) fail_data("vmf: m must be >= 2");
          if (!std::isfinite(s.kappa) || s.kappa < 0.0)
            fail_data("vmf: kappa must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, TwoPointCircle>) {
          if (!std::isfinite(s.a) || !std::isfinite(s.b))
            fail_data("two_point: atoms must be finite");
          if (!(s.w >= 0.0 && s.w <= 1.0))
            fail_data("two_point: w must be a probability");
        } else if constexpr (std::is_same_v<T, RingMixture>) {
          if (s.m < 2) fail_data("ring_mixture: m must be >= 2");
          if (!(s.theta > 1e-12 && s.theta < kPi - 1e-12))
            fail_data("ring_mixture: theta must lie strictly inside (0, pi)");
          if (!(s.alpha >= 0.0 && s.alpha <= 1.0))
            fail_data("ring_mixture: alpha must be a probability");
        } else if constexpr (std::is_same_v<T, RotSym>) {
          if (s.m < 2) fail_data("rot_sym: m must be >= 2");
          const auto& mix = s.mixing;
          for (const auto& a : mix.atoms) {
            if (!(a.weight >= 0.0)) fail_data("rot_sym: negative atom weight");
            if (a.theta < -1e-12 || a.theta > kPi + 1e-12)
              fail_data("rot_sym: atom outside [0, pi]");
          }
          if (mix.density_theta.size() != mix.density_value.size())
            fail_data("rot_sym: density node/value length mismatch");
          if (!mix.density_theta.empty() && mix.density_theta.size() < 2)
            fail_data("rot_sym: tabulated density needs at least 2 nodes");
          for (std::size_t i = 0; i < mix.density_theta.size(); ++i) {
            if (mix.density_theta[i] < -1e-12 ||
                mix.density_theta[i] > kPi + 1e-12)
              fail_data("rot_sym: density node outside [0, pi]");
            if (i > 0 && mix.density_theta[i] <= mix.density_theta[i - 1])
              fail_data("rot_sym: density nodes must be strictly increasing");
            if (!(mix.density_value[i] >= 0.0))
              fail_data("rot_sym: negative density value");
          }
          const double mass = mix.atom_mass() + mix.density_mass();
          if (std::fabs(mass - 1.0) > 1e-10)
            fail_data("rot_sym: mixing measure mass differs from 1");
        }
      },
      spec);
}

int spec_dim(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, VonMisesFisher>) return s.m;
        else if constexpr (std::is_same_v<T, RingMixture>) return s.m;
        else if constexpr (std::is_same_v<T, RotSym>) return s.m;
        else return 1;
      },
      spec);
}

SpherePoint spec_center(const DistributionSpec& spec) {
  if (const auto* vm = std::get_if<VonMisesCircle>(&spec))
    return SpherePoint::circle(vm->mu);
  if (const auto* cvm = std::get_if<ConditionedVonMises>(&spec))
    return SpherePoint::circle(cvm->mu);
  if (const auto* tp = std::get_if<TwoPointCircle>(&spec)) {
    // Weighted mean along the shorter arc; refined below by the exact
    // candidate evaluation in population_mean_and_variance.
    const double delta = wrap_angle(tp->b - tp->a);
    return SpherePoint::circle(tp->a + (1.0 - tp->w) * delta);
  }
  return SpherePoint::north_pole(spec_dim(spec));
}

// --- JSON ----------------------------------------------------------------

DistributionSpec spec_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail_data(std::string("spec JSON parse error: ") + e.what());
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    DistributionSpec spec;
    if (type == "von_mises") {
      spec = VonMisesCircle{j.at("mu").get<double>(), j.at("kappa").get<double>()};
    } else if (type == "conditioned_von_mises") {
      ConditionedVonMises s;
      s.mu = j.at("mu").get<double>();
      s.kappa = j.at("kappa").get<double>();
      for (const auto& iv : j.at("support"))
        s.support.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
      spec = s;
    } else if (type == "vmf") {
      spec = VonMisesFisher{j.at("m").get<int>(), j.at("kappa").get<double>()};
    } else if (type == "two_point") {
      spec = TwoPointCircle{j.at("a").get<double>(), j.at("b").get<double>(),
                            j.at("w").get<double>()};
    } else if (type == "ring_mixture") {
      spec = RingMixture{j.at("m").get<int>(), j.at("theta").get<double>(),
                         j.at("alpha").get<double>()};
    } else if (type == "rot_sym") {
      RotSym s;
      s.m = j.at("m").get<int>();
      if (j.contains("atoms"))
        for (const auto& a : j.at("atoms"))
          s.mixing.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
      if (j.contains("density")) {
        s.mixing.density_theta =
            j.at("density").at("theta").get<std::vector<double>>();
        s.mixing.density_value =
            j.at("density").at("value").get<std::vector<double>>();
      }
      spec = s;
    } else {
      fail_data("unknown distribution type \"" + type + "\"");
    }
    validate_spec(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail_data(std::string("spec JSON field error: ") + e.what());
  }
}

std::string spec_to_json(const DistributionSpec& spec) {
  ordered_json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, VonMisesCircle>) {
          j["type"] = "von_mises";
          j["mu"] = s.mu;
          j["kappa"] = s.kappa;
        } else if constexpr (std::is_same_v<T, ConditionedVonMises>) {
          j["type"] = "conditioned_von_mises";
          j["mu"] = s.mu;
          j["kappa"] = s.kappa;
          auto arr = ordered_json::array();
          for (const auto& iv : s.support)
            arr.push_back(ordered_json::array({iv.lo, iv.hi}));
          j["support"] = arr;
        } else if constexpr (std::is_same_v<T, VonMisesFisher>) {
          j["type"] = "vmf";
          j["m"] = s.m;
          j["kappa"] = s.kappa;
        } else if constexpr (std::is_same_v<T, TwoPointCircle>) {
          j["type"] = "two_point";
          j["a"] = s.a;
          j["b"] = s.b;
          j["w"] = s.w;
        } else if constexpr (std::is_same_v<T, RingMixture>) {
          j["type"] = "ring_mixture";
          j["m"] = s.m;
          j["theta"] = s.theta;
          j["alpha"] = s.alpha;
        } else if constexpr (std::is_same_v<T, RotSym>) {
          j["type"] = "rot_sym";
          j["m"] = s.m;
          auto arr = ordered_json::array();
          for (const auto& a : s.mixing.atoms)
            arr.push_back(ordered_json::array({a.theta, a.weight}));
          j["atoms"] = arr;
          if (s.mixing.has_density()) {
            j["density"] = ordered_json{{"theta", s.mixing.density_theta},
                                        {"value", s.mixing.density_value}};
          }
        }
      },
      spec);
  return j.dump();
}

// --- Sample ----------------------------------------------------------------

Sample Sample::circle(std::vector<double> angles) {
  if (angles.empty()) fail_data("sample must contain at least one point");
  for (double& a : angles) {
    if (!std::isfinite(a)) fail_data("sample contains a non-finite angle");
    a = wrap_angle(a);
  }
  const long n = static_cast<long>(angles.size());
  return Sample(1, n, std::move(angles));
}

Sample Sample::embedded(int m, std::vector<double> flat) {
  if (m < 2) fail_usage("Sample::embedded requires m >= 2");
  const std::size_t w = static_cast<std::size_t>(m) + 1;
  if (flat.empty() || flat.size() % w != 0)
    fail_data("sample buffer length is not a multiple of m + 1");
  const long n = static_cast<long>(flat.size() / w);
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
      const double v = flat[static_cast<std::size_t>(i) * w + k];
      if (!std::isfinite(v)) fail_data("sample contains a non-finite value");
      s += v * v;
    }
    if (std::fabs(std::sqrt(s) - 1.0) > 1e-9)
      fail_data("sample row is not a unit vector");
  }
  return Sample(m, n, std::move(flat));
}

SpherePoint Sample::point(long i) const {
  if (m_ == 1) return SpherePoint::circle(angle(i));
  const auto v = vec(i);
  return SpherePoint::embedded_normalized(std::vector<double>(v.begin(), v.end()));
}

const std::vector<double>& Sample::angles() const {
  if (m_ != 1) fail_usage("angles() is only defined for circle samples");
  return data_;
}

// --- Sampler -----------------------------------------------------------------

namespace {

// Inverse-CDF table: piecewise-linear CDF over uniform cells, one uniform
// variate per draw.
struct InvCdfTable {
  double lo = 0.0, hi = 0.0;
  std::vector<double> cdf;  // size cells + 1, cdf.front() = 0, cdf.back() = 1

  void build(double a, double b, int cells,
             const std::function<double(double)>& weight) {
    lo = a;
    hi = b;
    const double h = (b - a) / cells;
    std::vector<double> w(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) {
      w[static_cast<std::size_t>(i)] = weight(a + h * i);
      if (!(w[static_cast<std::size_t>(i)] >= 0.0))
        fail_data("inverse-CDF table: negative or NaN weight");
    }
    cdf.assign(static_cast<std::size_t>(cells) + 1, 0.0);
    long double acc = 0.0;
    for (int i = 0; i < cells; ++i) {
      acc += 0.5L * (w[static_cast<std::size_t>(i)] + w[static_cast<std::size_t>(i) + 1]) * h;
      cdf[static_cast<std::size_t>(i) + 1] = static_cast<double>(acc);
    }
    if (!(acc > 0.0)) fail_data("inverse-CDF table: zero total mass");
    for (auto& c : cdf) c = static_cast<double>(c / static_cast<double>(acc));
    cdf.back() = 1.0;
  }

  double sample(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t i = it == cdf.begin() ? 0 : static_cast<std::size_t>(it - cdf.begin() - 1);
    if (i >= cdf.size() - 1) i = cdf.size() - 2;
    const double c0 = cdf[i], c1 = cdf[i + 1];
    const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    const double h = (hi - lo) / static_cast<double>(cdf.size() - 1);
    return lo + h * (static_cast<double>(i) + t);
  }
};

double gamma_draw(RandomStream& rs, double a) {
  // Marsaglia-Tsang, valid for a >= 1.
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rs.normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rs.uniform_open();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

void uniform_direction(RandomStream& rs, std::span<double> out) {
  for (;;) {
    double n = 0.0;
    for (auto& o : out) {
      o = rs.normal();
      n += o * o;
    }
    n = std::sqrt(n);
    if (n > 1e-12) {
      for (auto& o : out) o /= n;
      return;
    }
  }
}

}  // namespace

struct Sampler::Impl {
  DistributionSpec spec;
  int m = 1;

  // von Mises (plain or conditioned): table for the centered distribution.
  InvCdfTable vm_table;
  bool have_vm_table = false;

  // von Mises-Fisher rejection constants.
  double wood_b = 0.0, wood_x0 = 0.0, wood_c = 0.0;

  // Rotationally symmetric polar-angle sampler.
  double atom_mass = 0.0;
  std::vector<double> atom_cum;
  InvCdfTable polar_table;
  bool have_polar_table = false;

  explicit Impl(DistributionSpec s) : spec(std::move(s)) {
    validate_spec(spec);
    m = spec_dim(spec);
    if (const auto* vm = std::get_if<VonMisesCircle>(&spec)) {
      if (vm->kappa > 0.0) {
        const double k = vm->kappa;
        vm_table.build(-kPi, kPi, 1 << 16,
                       [k](double z) { return std::exp(k * std::cos(z)); });
        have_vm_table = true;
      }
    } else if (const auto* cvm = std::get_if<ConditionedVonMises>(&spec)) {
      if (support_mass(*cvm) < 1e-12)
        fail_data("conditioned_von_mises: support carries no mass");
      if (cvm->kappa > 0.0) {
        const double k = cvm->kappa;
        vm_table.build(-kPi, kPi, 1 << 16,
                       [k](double z) { return std::exp(k * std::cos(z)); });
        have_vm_table = true;
      }
    } else if (const auto* f = std::get_if<VonMisesFisher>(&spec)) {
      if (f->kappa > 0.0) {
        const double k = f->kappa;
        const double mm = static_cast<double>(f->m);
        wood_b = mm / (2.0 * k + std::sqrt(4.0 * k * k + mm * mm));
        wood_x0 = (1.0 - wood_b) / (1.0 + wood_b);
        wood_c = k * wood_x0 + mm * std::log(1.0 - wood_x0 * wood_x0);
      }
    } else if (const auto* r = std::get_if<RotSym>(&spec)) {
      atom_mass = r->mixing.atom_mass();
      double acc = 0.0;
      for (const auto& a : r->mixing.atoms) {
        acc += a.weight;
        atom_cum.push_back(acc);
      }
      if (r->mixing.has_density() && r->mixing.density_mass() > 1e-14) {
        const auto& mix = r->mixing;
        polar_table.build(0.0, kPi, 1 << 13, [&mix](double t) {
          return detail::interp_density(mix.density_theta, mix.density_value, t);
        });
        have_polar_table = true;
      }
    }
  }

  double draw_centered_von_mises(RandomStream& rs) const {
    if (!have_vm_table) return -kPi + kTwoPi * rs.uniform();
    return vm_table.sample(rs.uniform());
  }

  SpherePoint draw(RandomStream& rs) const {
    if (const auto* vm = std::get_if<VonMisesCircle>(&spec)) {
      return SpherePoint::circle(vm->mu + draw_centered_von_mises(rs));
    }
    if (const auto* cvm = std::get_if<ConditionedVonMises>(&spec)) {
      for (long tries = 0; tries < 1000000; ++tries) {
        const double a = wrap_angle(cvm->mu + draw_centered_von_mises(rs));
        if (in_support(cvm->support, a)) return SpherePoint::circle(a);
      }
      fail_numeric("conditioned_von_mises: rejection cap reached");
    }
    if (const auto* tp = std::get_if<TwoPointCircle>(&spec)) {
      return SpherePoint::circle(rs.uniform() < tp->w ? tp->a : tp->b);
    }
    if (const auto* f = std::get_if<VonMisesFisher>(&spec)) {
      const std::size_t d = static_cast<std::size_t>(f->m) + 1;
      std::vector<double> x(d);
      if (f->kappa == 0.0) {
        uniform_direction(rs, x);
        return SpherePoint::embedded_normalized(std::move(x));
      }
      const double mm = static_cast<double>(f->m);
      double w = 0.0;
      for (;;) {
        const double g1 = gamma_draw(rs, 0.5 * mm);
        const double g2 = gamma_draw(rs, 0.5 * mm);
        const double z = g1 / (g1 + g2);
        w = (1.0 - (1.0 + wood_b) * z) / (1.0 - (1.0 - wood_b) * z);
        const double u = rs.uniform_open();
        if (f->kappa * w + mm * std::log(1.0 - wood_x0 * w) - wood_c >=
            std::log(u))
          break;
      }
      std::vector<double> q(d - 1);
      uniform_direction(rs, q);
      x[0] = w;
      const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
      for (std::size_t i = 0; i + 1 < d; ++i) x[i + 1] = s * q[i];
      return SpherePoint::embedded_normalized(std::move(x));
    }
    if (const auto* r = std::get_if<RingMixture>(&spec)) {
      const std::size_t d = static_cast<std::size_t>(r->m) + 1;
      if (rs.uniform() < r->alpha) {
        std::vector<double> q(d - 1);
        uniform_direction(rs, q);
        std::vector<double> x(d);
        x[0] = std::cos(r->theta);
        const double s = std::sin(r->theta);
        for (std::size_t i = 0; i + 1 < d; ++i) x[i + 1] = s * q[i];
        return SpherePoint::embedded_normalized(std::move(x));
      }
      std::vector<double> x(d, 0.0);
      x[0] = 1.0;
      return SpherePoint::embedded(std::move(x));
    }
    const auto& r = std::get<RotSym>(spec);
    const std::size_t d = static_cast<std::size_t>(r.m) + 1;
    const double u = rs.uniform();
    double theta = 0.0;
    if (u < atom_mass || !have_polar_table) {
      const auto it = std::upper_bound(atom_cum.begin(), atom_cum.end(),
                                       std::min(u, atom_mass));
      const std::size_t k = std::min<std::size_t>(
          static_cast<std::size_t>(it - atom_cum.begin()), atom_cum.size() - 1);
      theta = r.mixing.atoms[k].theta;
    } else {
      const double v = (u - atom_mass) / (1.0 - atom_mass);
      theta = polar_table.sample(std::min(v, 1.0));
    }
    std::vector<double> q(d - 1);
    uniform_direction(rs, q);
    std::vector<double> x(d);
    x[0] = std::cos(theta);
    const double s = std::sin(theta);
    for (std::size_t i = 0; i + 1 < d; ++i) x[i + 1] = s * q[i];
    return SpherePoint::embedded_normalized(std::move(x));
  }
};

Sampler::Sampler(DistributionSpec spec)
    : impl_(std::make_unique<Impl>(std::move(spec))) {}
Sampler::~Sampler() = default;
Sampler::Sampler(Sampler&&) noexcept = default;

const DistributionSpec& Sampler::spec() const { return impl_->spec; }
int Sampler::dim() const { return impl_->m; }

SpherePoint Sampler::draw(RandomStream& rs) const { return impl_->draw(rs); }

Sample Sampler::draw_n(long n, std::uint64_t seed, std::uint64_t stream) const {
  if (n < 1) fail_usage("sample size must be >= 1");
  const int m = impl_->m;
  if (m == 1) {
    std::vector<double> angles(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) {
      RandomStream rs(seed, stream, static_cast<std::uint64_t>(j));
      angles[static_cast<std::size_t>(j)] = impl_->draw(rs).angle();
    }
    return Sample::circle(std::move(angles));
  }
  const std::size_t w = static_cast<std::size_t>(m) + 1;
  std::vector<double> flat(static_cast<std::size_t>(n) * w);
  for (long j = 0; j < n; ++j) {
    RandomStream rs(seed, stream, static_cast<std::uint64_t>(j));
    const auto p = impl_->draw(rs);
    std::copy(p.coords().begin(), p.coords().end(),
              flat.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * w));
  }
  return Sample::embedded(m, std::move(flat));
}

Sample sample(const DistributionSpec& spec, long n, std::uint64_t seed,
              std::uint64_t stream) {
  return Sampler(spec).draw_n(n, seed, stream);
}

// --- Densities ----------------------------------------------------------------

double density(const DistributionSpec& spec, const SpherePoint& x) {
  if (const auto* vm = std::get_if<VonMisesCircle>(&spec)) {
    if (!x.is_circle()) fail_data("density: point dimension mismatch");
    return von_mises_density(vm->mu, vm->kappa, x.angle());
  }
  if (const auto* cvm = std::get_if<ConditionedVonMises>(&spec)) {
    if (!x.is_circle()) fail_data("density: point dimension mismatch");
    if (!in_support(cvm->support, x.angle())) return 0.0;
    return von_mises_density(cvm->mu, cvm->kappa, x.angle()) /
           support_mass(*cvm);
  }
  if (const auto* f = std::get_if<VonMisesFisher>(&spec)) {
    if (x.is_circle() || x.dim() != f->m)
      fail_data("density: point dimension mismatch");
    const double k = f->kappa;
    const int mm = f->m;
    const double z =
        sphere_surface_area(mm - 1) *
        integrate(
            [k, mm](double t) {
              return std::exp(k * std::cos(t)) *
                     std::pow(std::sin(t), mm - 1);
            },
            0.0, kPi, 1e-13);
    return std::exp(k * x.coords()[0]) / z;
  }
  fail_usage("density: distribution has no density (atomic component)");
}

double antipodal_density(const DistributionSpec& spec) {
  if (spec_dim(spec) != 1)
    fail_usage("antipodal_density is defined for circle distributions only");
  if (const auto* vm = std::get_if<VonMisesCircle>(&spec)) {
    return std::exp(-vm->kappa) / (kTwoPi * bessel_i0(vm->kappa));
  }
  if (const auto* cvm = std::get_if<ConditionedVonMises>(&spec)) {
    const double anti = wrap_angle(cvm->mu + kPi);
    if (!in_support(cvm->support, anti)) return 0.0;
    return std::exp(-cvm->kappa) /
           (kTwoPi * bessel_i0(cvm->kappa) * support_mass(*cvm));
  }
  const auto& tp = std::get<TwoPointCircle>(spec);
  const auto pop = population_mean_and_variance(spec);  // rejects tied means
  const double anti = wrap_angle(pop.mean.angle() + kPi);
  const double da = std::fabs(wrap_angle(tp.a - anti));
  const double db = std::fabs(wrap_angle(tp.b - anti));
  if (std::min(da, db) < 1e-9)
    fail_numeric("antipodal_density: atom at the antipode of the mean");
  return 0.0;
}

// --- Population mean and variance ---------------------------------------------

namespace {

// Population Frechet function scan on the circle, from a midpoint tabulation
// of the density. Used only to certify center-minimality and uniqueness; the
// returned variance comes from accurate quadrature instead.
struct CircleScan {
  double f_center = 0.0;
  double grid_min = 0.0;
  double far_min = 0.0;  // min over grid points further than 0.15 from center
  double range = 0.0;
};

CircleScan scan_circle(const std::function<double(double)>& dens,
                       double center) {
  constexpr int G = 8192;  // density nodes
  constexpr int P = 1024;  // probe points
  const double h = kTwoPi / G;
  std::vector<double> xs(G), fs(G);
  long double mass = 0.0;
  for (int g = 0; g < G; ++g) {
    xs[static_cast<std::size_t>(g)] = -kPi + (g + 0.5) * h;
    fs[static_cast<std::size_t>(g)] = dens(xs[static_cast<std::size_t>(g)]);
    mass += fs[static_cast<std::size_t>(g)];
  }
  auto value_at = [&](double p) {
    long double acc = 0.0;
    for (int g = 0; g < G; ++g) {
      const double d = std::fabs(xs[static_cast<std::size_t>(g)] - p);
      const double dd = std::min(d, kTwoPi - d);
      acc += dd * dd * fs[static_cast<std::size_t>(g)];
    }
    return static_cast<double>(acc / mass);
  };
  CircleScan out;
  out.f_center = value_at(center);
  out.grid_min = out.f_center;
  out.far_min = std::numeric_limits<double>::infinity();
  double maxv = out.f_center;
  for (int k = 0; k < P; ++k) {
    const double p = -kPi + (k + 0.5) * kTwoPi / P;
    const double v = value_at(p);
    out.grid_min = std::min(out.grid_min, v);
    maxv = std::max(maxv, v);
    const double dc = std::fabs(p - center);
    if (std::min(dc, kTwoPi - dc) > 0.15) out.far_min = std::min(out.far_min, v);
  }
  out.range = maxv - out.grid_min;
  return out;
}

PopulationSummary population_circle_continuous(const DistributionSpec& spec,
                                               double mu) {
  const double center = wrap_angle(mu);
  const auto dens = [&spec](double x) {
    return density(spec, SpherePoint::circle(x));
  };
  const auto scan = scan_circle(dens, center);
  const double tol = std::max(1e-8, 1e-3 * scan.range);
  if (scan.f_center > scan.grid_min + tol)
    fail_data("population mean is not at the symmetry center");
  if (scan.far_min < scan.f_center + tol)
    fail_data("population Frechet mean is not unique");

  // Variance by quadrature, split at the antipode where the squared distance
  // to the center loses smoothness.
  const double anti = wrap_angle(center + kPi);
  std::vector<std::pair<double, double>> pieces;
  if (const auto* cvm = std::get_if<ConditionedVonMises>(&spec)) {
    for (const auto& iv : cvm->support) pieces.push_back({iv.lo, iv.hi});
  } else {
    pieces.push_back({-kPi, kPi});
  }
  double v = 0.0;
  for (auto [lo, hi] : pieces) {
    std::vector<double> cuts{lo};
    if (anti > lo + 1e-14 && anti < hi - 1e-14) cuts.push_back(anti);
    cuts.push_back(hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      v += integrate(
          [&](double x) {
            const double d = std::fabs(x - center);
            const double dd = std::min(d, kTwoPi - d);
            return dd * dd * dens(x);
          },
          cuts[i], cuts[i + 1], 1e-12);
  }
  PopulationSummary out{SpherePoint::circle(center), v, true};
  if (!(out.variance > 1e-15))
    fail_data("population variance is zero (point mass)");
  return out;
}

PopulationSummary population_two_point(const TwoPointCircle& tp) {
  auto fvalue = [&](double p) {
    const double da = std::fabs(wrap_angle(tp.a - p));
    const double db = std::fabs(wrap_angle(tp.b - p));
    return tp.w * da * da + (1.0 - tp.w) * db * db;
  };
  // Stationary points are weighted means of arc representatives; all
  // representative combinations are covered by the nine shifts below.
  std::vector<std::pair<double, double>> candidates;
  for (int k1 = -1; k1 <= 1; ++k1)
    for (int k2 = -1; k2 <= 1; ++k2) {
      const double p = wrap_angle(tp.w * (tp.a + kTwoPi * k1) +
                                  (1.0 - tp.w) * (tp.b + kTwoPi * k2));
      candidates.emplace_back(p, fvalue(p));
    }
  double best_p = candidates.front().first;
  double best_v = candidates.front().second;
  for (const auto& [p, v] : candidates)
    if (v < best_v) {
      best_v = v;
      best_p = p;
    }
  for (const auto& [p, v] : candidates) {
    const double dp = std::fabs(wrap_angle(p - best_p));
    if (v < best_v + 1e-12 && dp > 1e-9)
      fail_data("population Frechet mean is not unique");
  }
  // Confirm global minimality on a fine grid.
  for (int k = 0; k < 4096; ++k) {
    const double p = -kPi + (k + 0.5) * kTwoPi / 4096;
    if (fvalue(p) < best_v - 1e-9)
      fail_data("population mean is not at the symmetry center");
  }
  PopulationSummary out{SpherePoint::circle(best_p), fvalue(best_p), true};
  if (!(out.variance > 1e-15))
    fail_data("population variance is zero (point mass)");
  return out;
}

PopulationSummary population_sphere(const DistributionSpec& spec) {
  const int m = spec_dim(spec);
  const double v = detail::mixing_expectation(
      spec, [](double t) { return t * t; });
  if (!(v > 1e-15)) fail_data("population variance is zero (point mass)");

  // The center must be a strict local minimum: positive Hessian coefficient.
  const double coeff = detail::hessian_coefficient(spec);
  if (!(coeff > 1e-9))
    fail_numeric("population center is not a strict local Frechet minimum");

  // Global scan of the rotationally symmetric Frechet profile F(psi). The
  // inner ring quadrature carries its own noise, so the outer integral runs
  // at a coarse tolerance; the scan is qualitative.
  auto profile = [&](double psi) {
    return detail::mixing_expectation(
        spec,
        [&](double t) {
          return detail::ring_frechet_function_tol(m, t, psi, 1e-9L);
        },
        1e-7);
  };
  bool unique_global = true;
  constexpr int P = 96;
  double fmin = v, fmax = v, far_min = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= P; ++k) {
    const double psi = kPi * k / P;
    const double f = profile(psi);
    fmin = std::min(fmin, f);
    fmax = std::max(fmax, f);
    if (psi > 0.15) far_min = std::min(far_min, f);
  }
  const double tol = std::max(1e-8, 1e-3 * (fmax - fmin));
  if (far_min < v + tol) unique_global = false;
  return PopulationSummary{SpherePoint::north_pole(m), v, unique_global};
}

}  // namespace

PopulationSummary population_mean_and_variance(const DistributionSpec& spec) {
  validate_spec(spec);
  if (const auto* vm = std::get_if<VonMisesCircle>(&spec))
    return population_circle_continuous(spec, vm->mu);
  if (const auto* cvm = std::get_if<ConditionedVonMises>(&spec))
    return population_circle_continuous(spec, cvm->mu);
  if (const auto* tp = std::get_if<TwoPointCircle>(&spec))
    return population_two_point(*tp);
  return population_sphere(spec);
}

namespace detail {

double interp_density(const std::vector<double>& xs,
                      const std::vector<double>& ys, double x) {
  if (xs.size() < 2 || x < xs.front() || x > xs.back()) return 0.0;
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin() - 1);
  if (i >= xs.size() - 1) i = xs.size() - 2;
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + t * (ys[i + 1] - ys[i]);
}

double mixing_expectation(const DistributionSpec& spec,
                          const std::function<double(double)>& f, double tol) {
  if (const auto* r = std::get_if<RingMixture>(&spec))
    return r->alpha * f(r->theta) + (1.0 - r->alpha) * f(0.0);
  if (const auto* rs = std::get_if<RotSym>(&spec)) {
    double acc = 0.0;
    for (const auto& a : rs->mixing.atoms) acc += a.weight * f(a.theta);
    if (rs->mixing.has_density()) {
      const auto& mix = rs->mixing;
      for (std::size_t i = 0; i + 1 < mix.density_theta.size(); ++i)
        acc += integrate(
            [&](double t) {
              return f(t) * interp_density(mix.density_theta,
                                           mix.density_value, t);
            },
            mix.density_theta[i], mix.density_theta[i + 1], tol);
    }
    return acc;
  }
  if (const auto* vf = std::get_if<VonMisesFisher>(&spec)) {
    const double k = vf->kappa;
    const int m = vf->m;
    auto w = [k, m](double t) {
      return std::exp(k * std::cos(t)) * std::pow(std::sin(t), m - 1);
    };
    const double z = integrate(w, 0.0, kPi, 1e-13);
    return integrate([&](double t) { return f(t) * w(t); }, 0.0, kPi, tol) / z;
  }
  fail_usage("mixing_expectation: spec is not rotationally symmetric on S^m");
}

}  // namespace detail

}  // namespace fss
