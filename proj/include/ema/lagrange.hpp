#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ema/profiles.hpp"
#include "ema/spectral.hpp"

namespace ema {

// State carried along one characteristic r(t; r0).
struct CharacteristicState {
  double r = 0.0;
  double u = 0.0;
  SpectralState spectral;
  // int_0^t -(p + (n-1) q) ds, so rho0(r0) exp(log_compression) is the
  // density integrated from the continuity equation.
  double log_compression = 0.0;
};

struct EulerianSnapshot {
  double t = 0.0;
  std::vector<double> grid;
  std::vector<double> rho, u, p, q, mu, nu;
  double bkm_integrand = 0.0;  // max over grid of max(|p|, |q|, |mu|, |nu|)
  bool post_blowup = false;
};

struct LagrangianFrame {
  double t = 0.0;
  std::vector<CharacteristicState> chars;
};

struct EnsembleConfig {
  // Default seeding: n_chars - 1 log-spaced radii in [1e-3 r_max, r_max]
  // plus the origin characteristic.
  int n_chars = 1024;
  // Explicit seeds (strictly increasing, inside [0, r_max]) replace the
  // default seeding when nonempty.
  std::vector<double> seeds;
  // Snapshot times in (0, t_end]; t = 0 and t_end are always emitted.
  std::vector<double> output_times;
  int grid_size = 257;  // uniform Eulerian grid on [0, r_max]
  IntegratorConfig integrator;

  void validate() const;  // ConfigError
};

enum class EnsembleTermination { horizon_reached, blowup_detected, crossing_detected };
const char* to_string(EnsembleTermination termination);

struct EnsembleResult {
  std::vector<double> seeds;
  std::vector<EulerianSnapshot> snapshots;
  std::vector<LagrangianFrame> frames;  // one per snapshot
  EnsembleTermination termination = EnsembleTermination::horizon_reached;
  std::optional<double> t_stop;        // blowup estimate or crossing time
  std::optional<double> culprit_r0;    // seed that blew up / first crossing pair
  // Diagnostics over every accepted step.
  double path_invariant_drift = 0.0;   // max |r(1-nu) - r0(1-nu0)| / max(1, r0)
  double density_mismatch = 0.0;       // max |rho_MA - rho_cont| / max(1, rho_cont)
};

// Integrates every characteristic (r, u, p, mu, q, nu) with one shared
// adaptive step: r' = u, u' = -kappa nu r, (p, mu) and (q, nu) by their
// closed systems. Stops at the first spectral blowup or the first ordering
// violation between neighbouring characteristics.
EnsembleResult advance_ensemble(const RadialProfile& profile, double t_end,
                                const EnsembleConfig& config);

// Trapezoidal integral of bkm_integrand over the snapshot times.
double bkm_monitor(std::span<const EulerianSnapshot> snapshots);

struct GradientBound {
  bool holds;
  double margin;  // max|p| - max|q| over the grid
};
// max |q| <= max |p| + tol_interp on the snapshot grid.
GradientBound gradient_bound_check(const EulerianSnapshot& snapshot, double tol_interp = 1e-6);

// max |rho_snapshot - pushforward_density| over grid radii inside the flowed
// hull [R_t(0), R_t(r_max)]; each radius is pulled back by invert_flow_radius.
// Valid while the flow is monotone (before the first fold).
double pushforward_gap(const RadialProfile& profile, const EulerianSnapshot& snapshot);

// Energy 1/2 sum w_i [u_i^2 + kappa (nu_i r_i)^2] rho0(r0_i) r0_i^(n-1) omega_n
// on a frame seeded at quadrature nodes.
double ensemble_energy(const RadialProfile& profile, std::span<const double> seeds,
                       std::span<const double> weights, const LagrangianFrame& frame,
                       double omega_n = 1.0);

}  // namespace ema
