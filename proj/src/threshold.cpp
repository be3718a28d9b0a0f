#include "ema/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ema/errors.hpp"

namespace ema {

const char* to_string(VerdictClass cls) {
  switch (cls) {
    case VerdictClass::subcritical: return "subcritical";
    case VerdictClass::supercritical: return "supercritical";
    case VerdictClass::boundary: return "boundary";
  }
  return "?";
}

double flow_factor(double lambda0, double h0, double kappa, double t) {
  const double sk = std::sqrt(kappa);
  return (1.0 - h0) + h0 * std::cos(sk * t) + lambda0 * std::sin(sk * t) / sk;
}

double threshold_margin(double lambda0, double h0, double kappa) {
  return kappa * (1.0 - 2.0 * h0) - lambda0 * lambda0;
}

namespace {

bool on_boundary(double margin, double kappa) {
  return std::abs(margin) <= kTolBoundary * std::max(1.0, kappa);
}

}  // namespace

std::optional<double> blowup_time_closed_form(double lambda0, double h0, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  const double margin = threshold_margin(lambda0, h0, kappa);
  if (margin > 0.0 && !on_boundary(margin, kappa)) return std::nullopt;

  const double sk = std::sqrt(kappa);
  const double a = 1.0 - h0;
  const double b = lambda0 / sk;
  const double amp = std::hypot(h0, b);
  const double delta = std::atan2(b, h0);
  // amp cos(theta - delta) = -a; on the boundary amp == |a| up to round-off
  const double beta = std::acos(std::clamp(-a / amp, -1.0, 1.0));

  const double two_pi = 2.0 * std::numbers::pi;
  double best = two_pi;
  for (double theta : {delta + beta, delta - beta}) {
    double th = std::fmod(theta, two_pi);
    if (th <= 0.0) th += two_pi;
    // the factor equals 1 at theta = 0, so a root there is a wrap-around
    if (th < 1e-15) th = two_pi;
    best = std::min(best, th);
  }
  return best / sk;
}

Verdict classify_point(double lambda0, double h0, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  const double margin = threshold_margin(lambda0, h0, kappa);
  Verdict v;
  if (on_boundary(margin, kappa)) {
    v.cls = VerdictClass::boundary;
    v.t_blowup = blowup_time_closed_form(lambda0, h0, kappa);
  } else if (margin > 0.0) {
    v.cls = VerdictClass::subcritical;
  } else {
    v.cls = VerdictClass::supercritical;
    v.t_blowup = blowup_time_closed_form(lambda0, h0, kappa);
  }
  return v;
}

std::vector<double> default_profile_grid(const RadialProfile& profile, int count) {
  return log_grid(1e-3 * profile.r_max(), profile.r_max(), count);
}

ProfileClassification classify_profile_detailed(const RadialProfile& profile,
                                                const std::vector<double>& r_grid) {
  if (r_grid.empty()) throw DomainError("classification grid is empty");
  for (double r : r_grid)
    if (!(r > 0.0) || r > profile.r_max()) throw DomainError("grid radius outside (0, r_max]");

  const double kappa = profile.kappa();
  ProfileClassification out{};
  out.margin_p = out.margin_q = std::numeric_limits<double>::infinity();

  std::optional<double> super_r, boundary_r, t_min;

  auto visit = [&](double r, double p0, double mu0, double q0, double nu0) {
    out.margin_p = std::min(out.margin_p, threshold_margin(p0, mu0, kappa));
    out.margin_q = std::min(out.margin_q, threshold_margin(q0, nu0, kappa));
    for (const Verdict& v : {classify_point(p0, mu0, kappa), classify_point(q0, nu0, kappa)}) {
      if (v.cls == VerdictClass::subcritical) continue;
      if (v.cls == VerdictClass::supercritical && !super_r) super_r = r;
      if (v.cls == VerdictClass::boundary && !boundary_r) boundary_r = r;
      if (v.t_blowup) t_min = std::min(t_min.value_or(*v.t_blowup), *v.t_blowup);
    }
  };

  // origin limit point
  visit(0.0, profile.p0(0.0), profile.mu0(0.0), profile.p0(0.0), profile.mu0(0.0));
  for (double r : r_grid) visit(r, profile.p0(r), profile.mu0(r), profile.q0(r), profile.nu0(r));

  Verdict& v = out.verdict;
  if (super_r) {
    v.cls = VerdictClass::supercritical;
    v.witness_r = super_r;
  } else if (boundary_r) {
    v.cls = VerdictClass::boundary;
    v.witness_r = boundary_r;
  }
  if (v.cls != VerdictClass::subcritical) {
    v.t_blowup = t_min;
    out.vacuum_witness = derive_density(profile, *v.witness_r) == 0.0;
  }
  return out;
}

Verdict classify_profile(const RadialProfile& profile, const std::vector<double>& r_grid) {
  return classify_profile_detailed(profile, r_grid).verdict;
}

Verdict sigma_membership(const SwirlState& state0, double kappa, double horizon,
                         IntegratorConfig config) {
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  config.horizon = horizon;
  config.record_states = false;
  const auto y0 = state0.to_array();
  const Trajectory traj = integrate({System::swirl, kappa}, y0, config);

  Verdict v;
  v.horizon = horizon;
  switch (traj.termination) {
    case Termination::horizon_reached:
      v.cls = VerdictClass::subcritical;
      break;
    case Termination::blowup_detected:
      v.cls = VerdictClass::supercritical;
      v.t_blowup = traj.t_blowup;
      break;
    case Termination::step_underflow:
      v.cls = VerdictClass::supercritical;
      v.t_blowup = traj.times.back();
      break;
  }
  return v;
}

double sharpness_bisect(double h0, double kappa, double horizon, IntegratorConfig config,
                        double tol) {
  if (!(h0 < 0.5)) throw DomainError("sharpness bisection needs h0 < 1/2");
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  config.horizon = horizon;
  config.record_states = false;

  auto bounded = [&](double lambda0) {
    const double y0[2] = {-lambda0, h0};
    return integrate({System::qnu, kappa}, y0, config).termination ==
           Termination::horizon_reached;
  };

  double lo = 0.0;
  double hi = 2.0 * std::sqrt(kappa);
  if (!bounded(lo)) throw BisectionError("predicate false at lambda0 = 0");
  if (bounded(hi)) throw BisectionError("predicate true at lambda0 = 2 sqrt(kappa)");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (bounded(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ema
