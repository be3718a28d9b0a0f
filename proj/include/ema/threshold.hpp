#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ema/profiles.hpp"
#include "ema/spectral.hpp"

namespace ema {

enum class VerdictClass { subcritical, supercritical, boundary };
const char* to_string(VerdictClass cls);

struct Verdict {
  VerdictClass cls = VerdictClass::subcritical;
  std::optional<double> t_blowup;   // absent iff subcritical
  std::optional<double> witness_r;  // profile verdicts: first failing radius
  std::optional<double> horizon;    // numerical verdicts are horizon-relative
};

// Relative resolution of the critical set lambda0^2 = kappa (1 - 2 h0).
inline constexpr double kTolBoundary = 1e-12;

// lambda(t) = (1 - h0) + h0 cos(sqrt(kappa) t) + lambda0 sin(sqrt(kappa) t) / sqrt(kappa),
// the eigenvalue of the flow gradient along one branch.
double flow_factor(double lambda0, double h0, double kappa, double t);

// kappa (1 - 2 h0) - lambda0^2: positive exactly on the subcritical side.
double threshold_margin(double lambda0, double h0, double kappa);

// Branch verdict for (lambda0, h0) = (p0, mu0) or (q0, nu0).
Verdict classify_point(double lambda0, double h0, double kappa);

// First t > 0 with flow_factor = 0, by the phase-shift reduction
// A cos(sqrt(kappa) t - delta) = -(1 - h0). Absent on the subcritical side.
// Any root lies in (0, 2 pi / sqrt(kappa)].
std::optional<double> blowup_time_closed_form(double lambda0, double h0, double kappa);

// 512 log-spaced radii in [1e-3 r_max, r_max].
std::vector<double> default_profile_grid(const RadialProfile& profile, int count = 512);

struct ProfileClassification {
  Verdict verdict;
  double margin_p;  // min over points of kappa (1 - 2 mu0) - p0^2
  double margin_q;  // min over points of kappa (1 - 2 nu0) - q0^2
  // rho0(witness_r) == 0: the singularity is a vacuum rather than a
  // concentration.
  bool vacuum_witness = false;
};

// Checks both branches at every grid radius plus the origin limit point
// (q0 = p0, nu0 = mu0 at r = 0). Throws DomainError on an empty grid or
// radii outside (0, r_max].
ProfileClassification classify_profile_detailed(const RadialProfile& profile,
                                                const std::vector<double>& r_grid);
Verdict classify_profile(const RadialProfile& profile, const std::vector<double>& r_grid);

// Numerical membership in the set of swirl states with globally bounded
// spectral dynamics, decided up to `horizon` (recorded in the verdict).
Verdict sigma_membership(const SwirlState& state0, double kappa, double horizon,
                         IntegratorConfig config = {});

inline double default_sigma_horizon(double kappa) { return 500.0 / std::sqrt(kappa); }

// Empirical threshold |q0| at which integration of (q, nu) from
// (-lambda0, h0) stops reaching `horizon`, bisected on [0, 2 sqrt(kappa)]
// to width `tol`. Throws BisectionError if the bracket does not separate
// bounded from blowing-up runs.
double sharpness_bisect(double h0, double kappa, double horizon, IntegratorConfig config = {},
                        double tol = 1e-7);

}  // namespace ema
