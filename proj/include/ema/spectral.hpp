#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ema {

using Vec2 = std::array<double, 2>;

// Eigenvalues of grad u (p = d_r u, q = u/r) and of D^2 phi
// (mu = d_rr phi, nu = d_r phi / r) at a point on a characteristic.
struct SpectralState {
  double p = 0.0;
  double q = 0.0;
  double mu = 0.0;
  double nu = 0.0;
};

// Spectral state of the 2D flow with swirl u = (x/r) u + (x^perp/r) Theta.
struct SwirlState {
  double p = 0.0;
  double q = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double theta_r = 0.0;       // d_r Theta
  double theta_over_r = 0.0;  // Theta / r

  std::array<double, 6> to_array() const { return {p, q, mu, nu, theta_r, theta_over_r}; }
  static SwirlState from(std::span<const double> y) { return {y[0], y[1], y[2], y[3], y[4], y[5]}; }
  bool operator==(const SwirlState&) const = default;
};

// (q, nu) along characteristics: q' = -q^2 - kappa nu, nu' = q (1 - nu).
Vec2 rhs_qnu(Vec2 state, double kappa);
// (p, mu) obeys the same law as (q, nu).
Vec2 rhs_pmu(Vec2 state, double kappa);
SwirlState rhs_swirl(const SwirlState& state, double kappa);
// Euler-Poisson comparison: q' = -q^2 - kappa nu, nu' = q (1 - n nu).
Vec2 rhs_ep_qnu(Vec2 state, double kappa, int n);
// (w, v) = (q, 1) / (1 - nu): w' = kappa (1 - v) + c0^2 v^-3, v' = w.
// Throws SingularInput for v = 0 with c0 != 0.
Vec2 rhs_wv(Vec2 state, double kappa, double c0);

enum class System {
  qnu,             // [q, nu]
  pmu,             // [p, mu]
  swirl,           // [p, q, mu, nu, theta_r, theta_over_r]
  swirl_q_branch,  // [q, nu, theta_over_r], the closed sub-system of `swirl`
  ep_qnu,          // [q, nu] with Euler-Poisson coupling
  wv,              // [w, v]
};

std::size_t state_dim(System system);
const char* to_string(System system);

struct OdeSpec {
  System system = System::qnu;
  double kappa = 1.0;
  int n = 2;        // ep_qnu only
  double c0 = 0.0;  // wv only
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double min_step = 1e-13;
  double blowup_magnitude = 1e9;
  double horizon = 100.0;
  bool record_states = true;  // false keeps only the first and last state

  // Throws ConfigError.
  void validate() const;
};

enum class Termination { horizon_reached, blowup_detected, step_underflow };
const char* to_string(Termination termination);

struct Trajectory {
  System system = System::qnu;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  Termination termination = Termination::horizon_reached;
  std::optional<double> t_blowup;  // set iff blowup_detected
  std::map<std::string, double> invariant_drift;
};

// Adaptive Dormand-Prince 5(4) integration to config.horizon. Stops with
// blowup_detected once any component exceeds blowup_magnitude, or when the
// step size underflows while 1/|y| is still shrinking. The blowup time is
// the last accepted time plus the zero of a line fitted to 1/|y| over the
// last three accepted steps.
Trajectory integrate(const OdeSpec& spec, std::span<const double> initial,
                     const IntegratorConfig& config);

// Ellipse invariant I = w^2 + kappa (1 - v)^2 of the no-swirl system.
double ellipse_invariant(double q, double nu, double kappa);

struct SwirlInvariants {
  double j1;  // (Theta/r) v^2
  double j2;  // w^2 + kappa (1 - v)^2 + C0^2 v^-2
};
// C0 is taken from the state itself; pass c0 to use a fixed constant.
SwirlInvariants swirl_invariants(double q, double nu, double theta_over_r, double kappa,
                                 std::optional<double> c0 = std::nullopt);

// max_t |I(t) - I(0)| / max(|I(0)|, 1) over a qnu or pmu trajectory.
// Throws SingularInput if nu >= 1 anywhere.
double monitor_ellipse(const Trajectory& trajectory, double kappa);

// Drifts {"J1", "J2"} over a swirl or swirl_q_branch trajectory.
std::map<std::string, double> monitor_swirl_invariants(const Trajectory& trajectory,
                                                       double kappa);

}  // namespace ema
