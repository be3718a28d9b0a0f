#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ema {

using ScalarFn = std::function<double(double)>;

// Radial initial data (u0, phi0) for the pressureless Euler-Monge-Ampere
// system. The density is never stored: it is derived from the potential
// through det(I - D^2 phi0) = rho0.
//
// Immutable after construction; every evaluator is const and thread safe.
class RadialProfile {
 public:
  struct Fields {
    ScalarFn u0;      // radial velocity
    ScalarFn du0;     // u0'
    ScalarFn dphi0;   // phi0'
    ScalarFn d2phi0;  // phi0''
    // phi0'''(0), used by the ratio-form Taylor fallback near the origin.
    std::optional<double> d3phi0_origin;
  };

  RadialProfile(int dimension, double kappa, double r_max, Fields fields);

  int dimension() const { return n_; }
  double kappa() const { return kappa_; }
  double r_max() const { return r_max_; }
  // Radius below which ratio forms u0/r and phi0'/r use their limits.
  double r_eps() const { return 1e-8 * r_max_; }

  double u0(double r) const { return f_.u0(r); }
  double dphi0(double r) const { return f_.dphi0(r); }

  // Eigenvalues of grad u0 and D^2 phi0 at radius r.
  double p0(double r) const { return f_.du0(r); }
  double q0(double r) const;
  double mu0(double r) const { return f_.d2phi0(r); }
  double nu0(double r) const;

  // Throws DomainError if r lies outside [0, r_max].
  void check_radius(double r) const;

 private:
  int n_;
  double kappa_;
  double r_max_;
  Fields f_;
};

// rho0(r) = (1 - mu0)(1 - nu0)^(n-1). Below r_eps the limit nu0 -> mu0(0)
// gives (1 - mu0(0))^n.
double derive_density(const RadialProfile& profile, double r);

// e0(r) = int_0^r s^(n-1) rho0(s) ds by adaptive Gauss-Kronrod refinement
// (absolute tolerance 1e-12, relative 1e-10). Throws QuadratureError when the
// estimate misses the tolerance.
double transported_primitive(const RadialProfile& profile, double r);
double transported_primitive(const ScalarFn& density, int dimension, double r);

// Gamma^{-1}(r) = [n e0(r)]^(1/n).
double gamma_inverse(const RadialProfile& profile, double r);
// Equivalent closed form Gamma^{-1}(r) = r - phi0'(r).
double gamma_inverse_identity(const RadialProfile& profile, double r);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with `count` nodes mapped onto [a, b].
QuadratureRule gauss_legendre(int count, double a, double b);

std::vector<double> log_grid(double lo, double hi, int count);
std::vector<double> uniform_grid(double lo, double hi, int count);

// Named preset with an ordered parameter list. Unspecified parameters take
// the preset defaults.
struct ProfilePreset {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
};

struct PresetInfo {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, double>> defaults;
  // Constant C with |nu0(r_eps) - mu0(0)| <= C r_eps for this family.
  double origin_constant;
};

const std::vector<PresetInfo>& preset_catalog();

// Builds the profile and checks rho0 >= 0 on a 2049-point grid
// (DomainError otherwise). Unknown names or parameters raise ConfigError.
RadialProfile make_profile(const ProfilePreset& preset, int dimension, double kappa);

// Smooth compactly supported bump B(r) = exp(1 - 1/(1 - (r/w)^2)) on r < w
// and its first two radial derivatives; exposed for tests.
struct BumpDerivs {
  double value;
  double d1;
  double d2;
};
BumpDerivs bump(double r, double width);

}  // namespace ema
