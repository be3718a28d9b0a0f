#include "ema/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "ema/errors.hpp"

namespace ema {

namespace {

constexpr double kQuadAbsTol = 1e-12;
constexpr double kQuadRelTol = 1e-10;

std::string fmt_radius(double r) {
  std::ostringstream os;
  os.precision(17);
  os << r;
  return os.str();
}

}  // namespace

RadialProfile::RadialProfile(int dimension, double kappa, double r_max, Fields fields)
    : n_(dimension), kappa_(kappa), r_max_(r_max), f_(std::move(fields)) {
  if (n_ < 1) throw ConfigError("dimension must be >= 1");
  if (!(kappa_ > 0.0)) throw ConfigError("kappa must be positive");
  if (!(r_max_ > 0.0)) throw ConfigError("r_max must be positive");
  if (!f_.u0 || !f_.du0 || !f_.dphi0 || !f_.d2phi0)
    throw ConfigError("profile is missing a derivative evaluator");
}

void RadialProfile::check_radius(double r) const {
  if (!(r >= 0.0) || r > r_max_)
    throw DomainError("radius " + fmt_radius(r) + " outside [0, r_max]");
}

double RadialProfile::q0(double r) const {
  if (r < r_eps()) return f_.du0(r);
  return f_.u0(r) / r;
}

double RadialProfile::nu0(double r) const {
  if (r < r_eps()) {
    if (f_.d3phi0_origin) return f_.d2phi0(0.0) + *f_.d3phi0_origin * r / 2.0;
    return f_.d2phi0(r);
  }
  return f_.dphi0(r) / r;
}

double derive_density(const RadialProfile& profile, double r) {
  profile.check_radius(r);
  const int n = profile.dimension();
  if (r < profile.r_eps()) return std::pow(1.0 - profile.mu0(0.0), n);
  return (1.0 - profile.mu0(r)) * std::pow(1.0 - profile.nu0(r), n - 1);
}

double transported_primitive(const ScalarFn& density, int dimension, double r) {
  if (!(r >= 0.0)) throw DomainError("radius must be nonnegative");
  if (r == 0.0) return 0.0;
  const int n = dimension;
  // integrate over s = r x, x in [0, 1], so the tolerance stays relative at small r
  auto integrand = [&](double x) { return std::pow(x, n - 1) * density(r * x); };
  double error = 0.0;
  double l1 = 0.0;
  const double unit = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, 0.0, 1.0, 15, kQuadRelTol, &error, &l1);
  if (!std::isfinite(unit) || error > std::max(kQuadAbsTol, kQuadRelTol * std::abs(unit)))
    throw QuadratureError("primitive at r=" + fmt_radius(r) + " missed tolerance (estimate " +
                          fmt_radius(error) + ")");
  const double value = std::pow(r, n) * unit;
  return value;
}

double transported_primitive(const RadialProfile& profile, double r) {
  profile.check_radius(r);
  return transported_primitive([&](double s) { return derive_density(profile, s); },
                               profile.dimension(), r);
}

double gamma_inverse(const RadialProfile& profile, double r) {
  const int n = profile.dimension();
  const double e = transported_primitive(profile, r);
  return std::pow(n * std::max(e, 0.0), 1.0 / n);
}

double gamma_inverse_identity(const RadialProfile& profile, double r) {
  profile.check_radius(r);
  return r - profile.dphi0(r);
}

QuadratureRule gauss_legendre(int count, double a, double b) {
  if (count < 1) throw ConfigError("quadrature needs at least one node");
  // boost returns the nonnegative zeros in increasing order
  const auto zeros = boost::math::legendre_p_zeros<double>(count);
  std::vector<double> x;
  x.reserve(count);
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
    if (*it != 0.0) x.push_back(-*it);
  x.insert(x.end(), zeros.begin(), zeros.end());

  QuadratureRule rule;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (double xi : x) {
    const double dp = boost::math::legendre_p_prime(count, xi);
    rule.nodes.push_back(mid + half * xi);
    rule.weights.push_back(half * 2.0 / ((1.0 - xi * xi) * dp * dp));
  }
  return rule;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("invalid log grid");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = hi;
    return g;
  }
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) g[i] = lo * std::exp(step * i);
  g.back() = hi;
  return g;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count < 1 || !(hi >= lo)) throw ConfigError("invalid uniform grid");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
  return g;
}

BumpDerivs bump(double r, double width) {
  const double s = (r / width) * (r / width);
  if (s >= 1.0) return {0.0, 0.0, 0.0};
  const double om = 1.0 - s;
  const double b = std::exp(1.0 - 1.0 / om);
  const double w2 = width * width;
  const double d1 = -b * 2.0 * r / (w2 * om * om);
  const double d2 = -2.0 * b / (w2 * om * om) * (1.0 - 2.0 * s / (om * om) + 4.0 * s / om);
  return {b, d1, d2};
}

// ---------------------------------------------------------------------------
// Presets

namespace {

using ParamMap = std::map<std::string, double>;

struct QuadraticCore {
  double a;   // core curvature: phi0 = a r^2 / 2 + c B(r)
  double c;   // bump amplitude
  double w;   // bump support radius
  double b;   // velocity amplitude: u0 = b r exp(-r^2 / (2 s^2))
  double s;   // velocity width
  double r_max;
};

RadialProfile build_quadratic_core(const QuadraticCore& q, int n, double kappa) {
  RadialProfile::Fields f;
  f.u0 = [q](double r) { return q.b * r * std::exp(-r * r / (2.0 * q.s * q.s)); };
  f.du0 = [q](double r) {
    return q.b * (1.0 - r * r / (q.s * q.s)) * std::exp(-r * r / (2.0 * q.s * q.s));
  };
  f.dphi0 = [q](double r) { return q.a * r + q.c * bump(r, q.w).d1; };
  f.d2phi0 = [q](double r) { return q.a + q.c * bump(r, q.w).d2; };
  f.d3phi0_origin = 0.0;  // phi0 is even in r
  return RadialProfile(n, kappa, q.r_max, std::move(f));
}

const std::vector<std::pair<std::string, double>> kQuadraticDefaults = {
    {"a", 0.1}, {"c", 0.0}, {"w", 2.0}, {"b", -0.6}, {"s", 1.0}, {"r_max", 4.0}};

ParamMap merge(const std::vector<std::pair<std::string, double>>& defaults,
               const ProfilePreset& preset) {
  ParamMap m(defaults.begin(), defaults.end());
  for (const auto& [k, v] : preset.params) {
    if (!m.count(k)) throw ConfigError("preset '" + preset.name + "' has no parameter '" + k + "'");
    m[k] = v;
  }
  return m;
}

QuadraticCore core_from(const ParamMap& m) {
  return {m.at("a"), m.at("c"), m.at("w"), m.at("b"), m.at("s"), m.at("r_max")};
}

void check_density(const RadialProfile& p) {
  const int samples = 2049;
  for (int i = 0; i < samples; ++i) {
    const double r = p.r_max() * i / (samples - 1);
    const double rho = derive_density(p, r);
    if (!(rho >= 0.0))
      throw DomainError("preset yields negative density at r=" + fmt_radius(r));
  }
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"equilibrium", "u0 = 0, phi0 = 0 (rho0 = 1)", {{"r_max", 4.0}}, 0.0},
      {"quadratic_core",
       "phi0 = a r^2/2 + c B(r; w), u0 = b r exp(-r^2/(2 s^2))",
       kQuadraticDefaults,
       1.0},
      {"subcritical_canonical",
       "quadratic core a=0.1, b=-0.6 (max |u0'| = 0.6, phi0'' = 0.1)",
       {{"r_max", 4.0}},
       1.0},
      {"subcritical_bump",
       "quadratic core a=0.05 with bump c=-0.3, w=2.5 and expanding velocity b=0.5",
       {{"r_max", 4.0}},
       1.0},
      {"supercritical_canonical",
       "quadratic core a=-0.55, b=-1.5: compressive collapse at the origin",
       {{"r_max", 4.0}},
       1.0},
      {"boundary_tuned",
       "quadratic core with b = -sqrt(kappa (1 - 2a)): threshold attained at r = 0",
       {{"a", 0.1}, {"s", 1.0}, {"r_max", 4.0}},
       1.0},
  };
  return catalog;
}

RadialProfile make_profile(const ProfilePreset& preset, int dimension, double kappa) {
  if (dimension < 1) throw ConfigError("dimension must be >= 1");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  const auto& cat = preset_catalog();
  const auto it = std::find_if(cat.begin(), cat.end(),
                               [&](const PresetInfo& p) { return p.name == preset.name; });
  if (it == cat.end()) throw ConfigError("unknown preset '" + preset.name + "'");
  const ParamMap m = merge(it->defaults, preset);
  if (!(m.at("r_max") > 0.0)) throw ConfigError("r_max must be positive");

  std::optional<RadialProfile> profile;
  if (preset.name == "equilibrium") {
    RadialProfile::Fields f;
    auto zero = [](double) { return 0.0; };
    f.u0 = f.du0 = f.dphi0 = f.d2phi0 = zero;
    f.d3phi0_origin = 0.0;
    profile.emplace(dimension, kappa, m.at("r_max"), std::move(f));
  } else if (preset.name == "quadratic_core") {
    const QuadraticCore q = core_from(m);
    if (!(q.s > 0.0) || !(q.w > 0.0)) throw ConfigError("widths s and w must be positive");
    profile.emplace(build_quadratic_core(q, dimension, kappa));
  } else if (preset.name == "subcritical_canonical") {
    profile.emplace(build_quadratic_core({0.1, 0.0, 2.0, -0.6, 1.0, m.at("r_max")}, dimension, kappa));
  } else if (preset.name == "subcritical_bump") {
    profile.emplace(build_quadratic_core({0.05, -0.3, 2.5, 0.5, 1.0, m.at("r_max")}, dimension, kappa));
  } else if (preset.name == "supercritical_canonical") {
    profile.emplace(build_quadratic_core({-0.55, 0.0, 2.0, -1.5, 1.0, m.at("r_max")}, dimension, kappa));
  } else {  // boundary_tuned
    const double a = m.at("a");
    if (!(a < 0.5)) throw ConfigError("boundary_tuned needs a < 1/2");
    const double b = -std::sqrt(kappa * (1.0 - 2.0 * a));
    profile.emplace(build_quadratic_core({a, 0.0, 2.0, b, m.at("s"), m.at("r_max")}, dimension, kappa));
  }
  check_density(*profile);
  return *profile;
}

}  // namespace ema
