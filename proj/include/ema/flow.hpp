#pragma once

#include <optional>
#include <span>

#include "ema/profiles.hpp"
#include "ema/spectral.hpp"

namespace ema {

// Closed-form characteristic flow of the radial system:
//   R_t(r0) = (r0 - phi0'(r0)) + phi0'(r0) cos(sqrt(kappa) t) + u0(r0) sin(sqrt(kappa) t) / sqrt(kappa)
// Every quantity here is 2 pi / sqrt(kappa)-periodic in t.

struct FlowEigs {
  double lam1;  // radial eigenvalue of grad X_t
  double lam2;  // tangential eigenvalue (multiplicity n - 1)
};

struct FlowSample {
  double r0;
  double t;
  double r_t;
  double lam1;
  double lam2;
  double density;
  double velocity;
};

enum class GammaRoute {
  identity,    // Gamma^{-1}(r0) = r0 - phi0'(r0)
  quadrature,  // Gamma^{-1}(r0) = [n e0(r0)]^(1/n)
};

// All operations throw DomainError for r0 outside [0, r_max] or t < 0.
double flow_radius(const RadialProfile& profile, double r0, double t);
// d/dt R_t(r0) = u(R_t(r0), t).
double flow_velocity(const RadialProfile& profile, double r0, double t);
// lam2 := lam1 below r_eps.
FlowEigs flow_gradient_eigs(const RadialProfile& profile, double r0, double t);
// rho0(r0) / (lam1 lam2^(n-1)); FlowSingular once the Jacobian is <= 0.
double pushforward_density(const RadialProfile& profile, double r0, double t);
// phi_r(R_t(r0), t) = R_t(r0) - Gamma^{-1}(r0).
double potential_gradient_on_path(const RadialProfile& profile, double r0, double t,
                                  GammaRoute route = GammaRoute::identity);
FlowSample sample_flow(const RadialProfile& profile, double r0, double t);

// (p, q, mu, nu) at (R_t(r0), t) reconstructed from the flow: p = lam1'/lam1,
// q = lam2'/lam2, mu = 1 - (1 - mu0)/lam1, nu = phi_r / R_t.
SpectralState spectral_on_path(const RadialProfile& profile, double r0, double t);

// E(t) = 1/2 sum_i w_i [ (d_t R_t)^2 + kappa (R_t - Gamma^{-1})^2 ] rho0 r0^(n-1) omega_n.
// FlowSingular if any node has a non-positive Jacobian.
double conserved_energy(const RadialProfile& profile, std::span<const double> r0_nodes,
                        std::span<const double> weights, double t, double omega_n = 1.0);

// First time the flow gradient loses positive definiteness at r0, i.e. the
// earlier closed-form blowup time of the two branches. Absent if both are
// subcritical.
std::optional<double> positive_definite_horizon(const RadialProfile& profile, double r0);

// Solves R_t(r0) = r for r0 in [0, r_max] by bracketing bisection; requires
// R_t to be increasing (subcritical flow). DomainError if r is not attained.
double invert_flow_radius(const RadialProfile& profile, double r, double t);

}  // namespace ema
