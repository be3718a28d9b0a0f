#include "ema/flow.hpp"

#include <algorithm>
#include <cmath>

#include "ema/errors.hpp"
#include "ema/threshold.hpp"

namespace ema {

namespace {

void check(const RadialProfile& profile, double r0, double t) {
  profile.check_radius(r0);
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
}

double jacobian(const FlowEigs& e, int n) { return e.lam1 * std::pow(e.lam2, n - 1); }

// d/dt of flow_factor
double flow_factor_rate(double lambda0, double h0, double kappa, double t) {
  const double sk = std::sqrt(kappa);
  return -sk * h0 * std::sin(sk * t) + lambda0 * std::cos(sk * t);
}

}  // namespace

double flow_radius(const RadialProfile& profile, double r0, double t) {
  check(profile, r0, t);
  const double sk = std::sqrt(profile.kappa());
  const double g = profile.dphi0(r0);
  return (r0 - g) + g * std::cos(sk * t) + profile.u0(r0) * std::sin(sk * t) / sk;
}

double flow_velocity(const RadialProfile& profile, double r0, double t) {
  check(profile, r0, t);
  const double sk = std::sqrt(profile.kappa());
  return -sk * profile.dphi0(r0) * std::sin(sk * t) + profile.u0(r0) * std::cos(sk * t);
}

FlowEigs flow_gradient_eigs(const RadialProfile& profile, double r0, double t) {
  check(profile, r0, t);
  const double kappa = profile.kappa();
  const double lam1 = flow_factor(profile.p0(r0), profile.mu0(r0), kappa, t);
  if (r0 < profile.r_eps()) return {lam1, lam1};
  return {lam1, flow_factor(profile.q0(r0), profile.nu0(r0), kappa, t)};
}

double pushforward_density(const RadialProfile& profile, double r0, double t) {
  const FlowEigs e = flow_gradient_eigs(profile, r0, t);
  const double jac = jacobian(e, profile.dimension());
  if (!(jac > 0.0) || !(e.lam1 > 0.0) || !(e.lam2 > 0.0))
    throw FlowSingular("flow Jacobian is not positive at this (r0, t)");
  return derive_density(profile, r0) / jac;
}

double potential_gradient_on_path(const RadialProfile& profile, double r0, double t,
                                  GammaRoute route) {
  const double r_t = flow_radius(profile, r0, t);
  const double g_inv = route == GammaRoute::identity ? gamma_inverse_identity(profile, r0)
                                                     : gamma_inverse(profile, r0);
  return r_t - g_inv;
}

FlowSample sample_flow(const RadialProfile& profile, double r0, double t) {
  const FlowEigs e = flow_gradient_eigs(profile, r0, t);
  FlowSample s{};
  s.r0 = r0;
  s.t = t;
  s.r_t = flow_radius(profile, r0, t);
  s.lam1 = e.lam1;
  s.lam2 = e.lam2;
  s.density = pushforward_density(profile, r0, t);
  s.velocity = flow_velocity(profile, r0, t);
  return s;
}

SpectralState spectral_on_path(const RadialProfile& profile, double r0, double t) {
  const FlowEigs e = flow_gradient_eigs(profile, r0, t);
  if (!(e.lam1 > 0.0) || !(e.lam2 > 0.0))
    throw FlowSingular("flow gradient is not positive definite at this (r0, t)");
  const double kappa = profile.kappa();
  const bool origin = r0 < profile.r_eps();
  const double p0 = profile.p0(r0);
  const double mu0 = profile.mu0(r0);
  const double q0 = origin ? p0 : profile.q0(r0);
  const double nu0 = origin ? mu0 : profile.nu0(r0);

  SpectralState s;
  s.p = flow_factor_rate(p0, mu0, kappa, t) / e.lam1;
  s.q = flow_factor_rate(q0, nu0, kappa, t) / e.lam2;
  s.mu = 1.0 - (1.0 - mu0) / e.lam1;
  if (origin) {
    s.nu = 1.0 - (1.0 - nu0) / e.lam2;
  } else {
    s.nu = potential_gradient_on_path(profile, r0, t) / flow_radius(profile, r0, t);
  }
  return s;
}

double conserved_energy(const RadialProfile& profile, std::span<const double> r0_nodes,
                        std::span<const double> weights, double t, double omega_n) {
  if (r0_nodes.size() != weights.size()) throw ConfigError("nodes and weights differ in length");
  const int n = profile.dimension();
  const double kappa = profile.kappa();
  double energy = 0.0;
  for (std::size_t i = 0; i < r0_nodes.size(); ++i) {
    const double r0 = r0_nodes[i];
    const FlowEigs e = flow_gradient_eigs(profile, r0, t);
    if (!(jacobian(e, n) > 0.0)) throw FlowSingular("flow Jacobian is not positive at a node");
    const double v = flow_velocity(profile, r0, t);
    const double g = potential_gradient_on_path(profile, r0, t);
    energy += weights[i] * (v * v + kappa * g * g) * derive_density(profile, r0) *
              std::pow(r0, n - 1);
  }
  return 0.5 * omega_n * energy;
}

std::optional<double> positive_definite_horizon(const RadialProfile& profile, double r0) {
  check(profile, r0, 0.0);
  const double kappa = profile.kappa();
  const auto t1 = blowup_time_closed_form(profile.p0(r0), profile.mu0(r0), kappa);
  const auto t2 = r0 < profile.r_eps()
                      ? t1
                      : blowup_time_closed_form(profile.q0(r0), profile.nu0(r0), kappa);
  if (t1 && t2) return std::min(*t1, *t2);
  return t1 ? t1 : t2;
}

double invert_flow_radius(const RadialProfile& profile, double r, double t) {
  double lo = 0.0;
  double hi = profile.r_max();
  const double f_lo = flow_radius(profile, lo, t);
  const double f_hi = flow_radius(profile, hi, t);
  if (r < f_lo || r > f_hi) throw DomainError("radius not attained by the flow");
  for (int it = 0; it < 200 && hi - lo > 4e-16 * profile.r_max(); ++it) {
    const double mid = 0.5 * (lo + hi);
    (flow_radius(profile, mid, t) < r ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ema
