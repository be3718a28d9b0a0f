#include "ema/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "ema/errors.hpp"
#include "ema/ode.hpp"

namespace ema {

Vec2 rhs_qnu(Vec2 s, double kappa) {
  const auto [q, nu] = s;
  return {-q * q - kappa * nu, q * (1.0 - nu)};
}

Vec2 rhs_pmu(Vec2 s, double kappa) { return rhs_qnu(s, kappa); }

SwirlState rhs_swirl(const SwirlState& s, double kappa) {
  const double tor = s.theta_over_r;
  SwirlState d;
  d.q = -s.q * s.q - kappa * s.nu + tor * tor;
  d.nu = s.q * (1.0 - s.nu);
  d.theta_over_r = -2.0 * s.q * tor;
  d.p = -s.p * s.p - kappa * s.mu + 2.0 * s.theta_r * tor - tor * tor;
  d.mu = s.p * (1.0 - s.mu);
  d.theta_r = -(s.p + s.q) * s.theta_r - (s.p - s.q) * tor;
  return d;
}

Vec2 rhs_ep_qnu(Vec2 s, double kappa, int n) {
  const auto [q, nu] = s;
  return {-q * q - kappa * nu, q * (1.0 - n * nu)};
}

Vec2 rhs_wv(Vec2 s, double kappa, double c0) {
  const auto [w, v] = s;
  if (c0 == 0.0) return {kappa * (1.0 - v), w};
  if (v == 0.0) throw SingularInput("rhs_wv: v = 0 with nonzero swirl constant");
  return {kappa * (1.0 - v) + c0 * c0 / (v * v * v), w};
}

std::size_t state_dim(System system) {
  switch (system) {
    case System::swirl:
      return 6;
    case System::swirl_q_branch:
      return 3;
    default:
      return 2;
  }
}

const char* to_string(System system) {
  switch (system) {
    case System::qnu: return "qnu";
    case System::pmu: return "pmu";
    case System::swirl: return "swirl";
    case System::swirl_q_branch: return "swirl_q_branch";
    case System::ep_qnu: return "ep_qnu";
    case System::wv: return "wv";
  }
  return "?";
}

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::horizon_reached: return "horizon_reached";
    case Termination::blowup_detected: return "blowup_detected";
    case Termination::step_underflow: return "step_underflow";
  }
  return "?";
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (!(min_step > 0.0) || !(max_step > min_step))
    throw ConfigError("need 0 < min_step < max_step");
  if (!(blowup_magnitude > 0.0)) throw ConfigError("blowup_magnitude must be positive");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
}

namespace {

void evaluate(const OdeSpec& spec, const std::vector<double>& y, std::vector<double>& dy) {
  switch (spec.system) {
    case System::qnu:
    case System::pmu: {
      const Vec2 d = rhs_qnu({y[0], y[1]}, spec.kappa);
      dy[0] = d[0];
      dy[1] = d[1];
      break;
    }
    case System::ep_qnu: {
      const Vec2 d = rhs_ep_qnu({y[0], y[1]}, spec.kappa, spec.n);
      dy[0] = d[0];
      dy[1] = d[1];
      break;
    }
    case System::wv: {
      const Vec2 d = rhs_wv({y[0], y[1]}, spec.kappa, spec.c0);
      dy[0] = d[0];
      dy[1] = d[1];
      break;
    }
    case System::swirl: {
      const auto d = rhs_swirl(SwirlState::from(y), spec.kappa).to_array();
      std::copy(d.begin(), d.end(), dy.begin());
      break;
    }
    case System::swirl_q_branch: {
      SwirlState s;
      s.q = y[0];
      s.nu = y[1];
      s.theta_over_r = y[2];
      const SwirlState d = rhs_swirl(s, spec.kappa);
      dy[0] = d.q;
      dy[1] = d.nu;
      dy[2] = d.theta_over_r;
      break;
    }
  }
}

double max_abs(const std::vector<double>& y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

// Zero of the least-squares line through (t_i, 1/|y_i|), or nullopt if
// 1/|y| is not decreasing.
std::optional<double> extrapolate_pole(const std::deque<std::pair<double, double>>& hist) {
  if (hist.size() < 2) return std::nullopt;
  double mt = 0, mz = 0;
  for (const auto& [t, z] : hist) {
    mt += t;
    mz += z;
  }
  mt /= hist.size();
  mz /= hist.size();
  double sxy = 0, sxx = 0;
  for (const auto& [t, z] : hist) {
    sxy += (t - mt) * (z - mz);
    sxx += (t - mt) * (t - mt);
  }
  if (sxx <= 0.0) return std::nullopt;
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) return std::nullopt;
  const auto& [t_last, z_last] = hist.back();
  return t_last + std::max(0.0, -z_last / slope);
}

}  // namespace

Trajectory integrate(const OdeSpec& spec, std::span<const double> initial,
                     const IntegratorConfig& config) {
  config.validate();
  const std::size_t dim = state_dim(spec.system);
  if (initial.size() != dim) throw ConfigError("initial state has the wrong dimension");
  for (double v : initial)
    if (!std::isfinite(v)) throw ConfigError("initial state must be finite");
  if (spec.system == System::ep_qnu && spec.n < 1) throw ConfigError("n must be >= 1");
  if (!(spec.kappa > 0.0)) throw ConfigError("kappa must be positive");

  Trajectory traj;
  traj.system = spec.system;
  std::vector<double> y(initial.begin(), initial.end());
  traj.times.push_back(0.0);
  traj.states.push_back(y);

  std::deque<std::pair<double, double>> hist;  // (t, 1/|y|) of the last accepted steps
  hist.emplace_back(0.0, 1.0 / std::max(max_abs(y), 1e-300));

  bool blew_up = false;
  auto observer = [&](double t, const std::vector<double>& state, bool) {
    const double m = max_abs(state);
    hist.emplace_back(t, std::isfinite(m) ? 1.0 / m : 0.0);
    if (hist.size() > 3) hist.pop_front();
    if (config.record_states) {
      traj.times.push_back(t);
      traj.states.push_back(state);
    }
    if (!std::isfinite(m) || m > config.blowup_magnitude) {
      blew_up = true;
      return false;
    }
    return true;
  };

  const ode::StepControl ctl{config.rel_tol, config.abs_tol, config.max_step, config.min_step};
  auto rhs = [&](double, const std::vector<double>& s, std::vector<double>& ds) {
    evaluate(spec, s, ds);
  };
  const auto out = ode::drive_dopri5(rhs, 0.0, y, config.horizon, ctl, {}, observer);

  if (!config.record_states && (traj.times.back() != out.t)) {
    traj.times.push_back(out.t);
    traj.states.push_back(y);
  }

  if (blew_up) {
    traj.termination = Termination::blowup_detected;
    traj.t_blowup = extrapolate_pole(hist).value_or(out.t);
  } else if (out.status == ode::DriveStatus::underflow) {
    if (auto t_est = extrapolate_pole(hist)) {
      traj.termination = Termination::blowup_detected;
      traj.t_blowup = *t_est;
    } else {
      traj.termination = Termination::step_underflow;
    }
  } else {
    traj.termination = Termination::horizon_reached;
  }

  try {
    if (spec.system == System::qnu || spec.system == System::pmu) {
      traj.invariant_drift["ellipse"] = monitor_ellipse(traj, spec.kappa);
    } else if (spec.system == System::swirl || spec.system == System::swirl_q_branch) {
      for (const auto& [k, v] : monitor_swirl_invariants(traj, spec.kappa))
        traj.invariant_drift[k] = v;
    }
  } catch (const SingularInput&) {
    // invariants are undefined once nu >= 1; leave the map empty
  }
  return traj;
}

double ellipse_invariant(double q, double nu, double kappa) {
  const double w = q / (1.0 - nu);
  const double v = 1.0 / (1.0 - nu);
  return w * w + kappa * (1.0 - v) * (1.0 - v);
}

SwirlInvariants swirl_invariants(double q, double nu, double theta_over_r, double kappa,
                                 std::optional<double> c0) {
  const double w = q / (1.0 - nu);
  const double v = 1.0 / (1.0 - nu);
  const double j1 = theta_over_r * v * v;
  const double c = c0.value_or(j1);
  return {j1, w * w + kappa * (1.0 - v) * (1.0 - v) + c * c / (v * v)};
}

namespace {

double rel_drift(double value, double ref) {
  return std::abs(value - ref) / std::max(std::abs(ref), 1.0);
}

}  // namespace

double monitor_ellipse(const Trajectory& trajectory, double kappa) {
  if (trajectory.system != System::qnu && trajectory.system != System::pmu)
    throw ConfigError("ellipse monitor needs a qnu or pmu trajectory");
  if (trajectory.states.empty()) return 0.0;
  double i0 = 0.0;
  double drift = 0.0;
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const auto& s = trajectory.states[k];
    if (!(s[1] < 1.0)) throw SingularInput("ellipse invariant undefined for nu >= 1");
    const double inv = ellipse_invariant(s[0], s[1], kappa);
    if (k == 0) i0 = inv;
    drift = std::max(drift, rel_drift(inv, i0));
  }
  return drift;
}

std::map<std::string, double> monitor_swirl_invariants(const Trajectory& trajectory,
                                                       double kappa) {
  std::size_t iq, inu, itor;
  if (trajectory.system == System::swirl) {
    iq = 1, inu = 3, itor = 5;
  } else if (trajectory.system == System::swirl_q_branch) {
    iq = 0, inu = 1, itor = 2;
  } else {
    throw ConfigError("swirl monitor needs a swirl trajectory");
  }
  std::map<std::string, double> drift{{"J1", 0.0}, {"J2", 0.0}};
  if (trajectory.states.empty()) return drift;
  const auto& s0 = trajectory.states.front();
  if (!(s0[inu] < 1.0)) throw SingularInput("swirl invariants undefined for nu >= 1");
  const SwirlInvariants ref = swirl_invariants(s0[iq], s0[inu], s0[itor], kappa);
  const double c0 = ref.j1;
  for (const auto& s : trajectory.states) {
    if (!(s[inu] < 1.0)) throw SingularInput("swirl invariants undefined for nu >= 1");
    const SwirlInvariants cur = swirl_invariants(s[iq], s[inu], s[itor], kappa, c0);
    drift["J1"] = std::max(drift["J1"], rel_drift(cur.j1, ref.j1));
    drift["J2"] = std::max(drift["J2"], rel_drift(cur.j2, ref.j2));
  }
  return drift;
}

}  // namespace ema
