#include "ema/lagrange.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "ema/errors.hpp"
#include "ema/flow.hpp"
#include "ema/interp.hpp"
#include "ema/ode.hpp"

namespace ema {

namespace {

// per-characteristic layout in the flat ensemble vector
constexpr std::size_t kR = 0, kU = 1, kP = 2, kMu = 3, kQ = 4, kNu = 5, kLog = 6, kStride = 7;

CharacteristicState unpack(const std::vector<double>& y, std::size_t i) {
  const double* s = y.data() + i * kStride;
  CharacteristicState c;
  c.r = s[kR];
  c.u = s[kU];
  c.spectral = {s[kP], s[kQ], s[kMu], s[kNu]};
  c.log_compression = s[kLog];
  return c;
}

double ma_density(const SpectralState& s, int n) {
  return (1.0 - s.mu) * std::pow(1.0 - s.nu, n - 1);
}

std::vector<double> seed_radii(const RadialProfile& profile, const EnsembleConfig& config) {
  if (!config.seeds.empty()) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      profile.check_radius(config.seeds[i]);
      if (i > 0 && !(config.seeds[i] > config.seeds[i - 1]))
        throw ConfigError("ensemble seeds must be strictly increasing");
    }
    return config.seeds;
  }
  std::vector<double> seeds{0.0};
  const auto g = log_grid(1e-3 * profile.r_max(), profile.r_max(), config.n_chars - 1);
  seeds.insert(seeds.end(), g.begin(), g.end());
  return seeds;
}

EulerianSnapshot reconstruct(const std::vector<CharacteristicState>& chars,
                             const std::vector<double>& grid, int n, double t) {
  EulerianSnapshot snap;
  snap.t = t;
  snap.grid = grid;
  const std::size_t m = chars.size();
  std::vector<double> r(m), f(m);
  for (std::size_t i = 0; i < m; ++i) r[i] = chars[i].r;

  auto field = [&](auto&& get) {
    for (std::size_t i = 0; i < m; ++i) f[i] = get(chars[i]);
    return MonotoneCubic(r, f)(grid);
  };
  snap.rho = field([n](const CharacteristicState& c) { return ma_density(c.spectral, n); });
  snap.u = field([](const CharacteristicState& c) { return c.u; });
  snap.p = field([](const CharacteristicState& c) { return c.spectral.p; });
  snap.q = field([](const CharacteristicState& c) { return c.spectral.q; });
  snap.mu = field([](const CharacteristicState& c) { return c.spectral.mu; });
  snap.nu = field([](const CharacteristicState& c) { return c.spectral.nu; });

  double bkm = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    bkm = std::max({bkm, std::abs(snap.p[j]), std::abs(snap.q[j]), std::abs(snap.mu[j]),
                    std::abs(snap.nu[j])});
  snap.bkm_integrand = bkm;
  bool finite = true;
  for (const auto* v : {&snap.rho, &snap.u, &snap.p, &snap.q, &snap.mu, &snap.nu})
    for (double x : *v) finite = finite && std::isfinite(x);
  snap.post_blowup = !finite;
  return snap;
}

}  // namespace

const char* to_string(EnsembleTermination termination) {
  switch (termination) {
    case EnsembleTermination::horizon_reached: return "horizon_reached";
    case EnsembleTermination::blowup_detected: return "blowup_detected";
    case EnsembleTermination::crossing_detected: return "crossing_detected";
  }
  return "?";
}

void EnsembleConfig::validate() const {
  if (seeds.empty() && n_chars < 2) throw ConfigError("n_chars must be >= 2");
  if (!seeds.empty() && seeds.size() < 2) throw ConfigError("need at least two seeds");
  if (grid_size < 2) throw ConfigError("grid_size must be >= 2");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (!(output_times[i] > 0.0)) throw ConfigError("output times must be positive");
    if (i > 0 && !(output_times[i] > output_times[i - 1]))
      throw ConfigError("output times must be increasing");
  }
  IntegratorConfig probe = integrator;
  probe.horizon = 1.0;
  probe.validate();
}

EnsembleResult advance_ensemble(const RadialProfile& profile, double t_end,
                                const EnsembleConfig& config) {
  config.validate();
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");

  const int n = profile.dimension();
  const double kappa = profile.kappa();
  EnsembleResult res;
  res.seeds = seed_radii(profile, config);
  const std::size_t m = res.seeds.size();
  const auto grid = uniform_grid(0.0, profile.r_max(), config.grid_size);

  std::vector<double> y(m * kStride);
  std::vector<double> path_const(m), rho0(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r0 = res.seeds[i];
    double* s = y.data() + i * kStride;
    s[kR] = r0;
    s[kU] = profile.u0(r0);
    s[kP] = profile.p0(r0);
    s[kMu] = profile.mu0(r0);
    s[kQ] = profile.q0(r0);
    s[kNu] = profile.nu0(r0);
    s[kLog] = 0.0;
    path_const[i] = r0 * (1.0 - s[kNu]);
    rho0[i] = derive_density(profile, r0);
  }

  auto frame_of = [&](double t, const std::vector<double>& state) {
    LagrangianFrame f;
    f.t = t;
    f.chars.reserve(m);
    for (std::size_t i = 0; i < m; ++i) f.chars.push_back(unpack(state, i));
    return f;
  };
  auto emit = [&](double t, const std::vector<double>& state) {
    res.frames.push_back(frame_of(t, state));
    res.snapshots.push_back(reconstruct(res.frames.back().chars, grid, n, t));
  };
  emit(0.0, y);

  auto rhs = [&](double, const std::vector<double>& s, std::vector<double>& ds) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* a = s.data() + i * kStride;
      double* d = ds.data() + i * kStride;
      d[kR] = a[kU];
      d[kU] = -kappa * a[kNu] * a[kR];
      const Vec2 dpm = rhs_pmu({a[kP], a[kMu]}, kappa);
      const Vec2 dqn = rhs_qnu({a[kQ], a[kNu]}, kappa);
      d[kP] = dpm[0];
      d[kMu] = dpm[1];
      d[kQ] = dqn[0];
      d[kNu] = dqn[1];
      d[kLog] = -(a[kP] + (n - 1) * a[kQ]);
    }
  };

  std::deque<std::pair<double, double>> hist;
  std::size_t worst = 0;
  bool blew_up = false;
  bool crossed = false;

  auto observer = [&](double t, const std::vector<double>& s, bool at_stop) {
    double umax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double* a = s.data() + i * kStride;
      const double mag =
          std::max({std::abs(a[kP]), std::abs(a[kQ]), std::abs(a[kMu]), std::abs(a[kNu])});
      if (!(mag <= umax)) {
        umax = mag;
        worst = i;
      }
      if (i > 0 && !(a[kR] > s[(i - 1) * kStride + kR]) && !crossed) {
        crossed = true;
        res.culprit_r0 = res.seeds[i - 1];
      }
    }
    hist.emplace_back(t, std::isfinite(umax) ? 1.0 / umax : 0.0);
    if (hist.size() > 3) hist.pop_front();
    if (!std::isfinite(umax) || umax > config.integrator.blowup_magnitude) {
      blew_up = true;
      return false;
    }
    if (crossed) return false;

    for (std::size_t i = 0; i < m; ++i) {
      const CharacteristicState c = unpack(s, i);
      const double r0 = res.seeds[i];
      res.path_invariant_drift =
          std::max(res.path_invariant_drift,
                   std::abs(c.r * (1.0 - c.spectral.nu) - path_const[i]) / std::max(1.0, r0));
      const double rho_cont = rho0[i] * std::exp(c.log_compression);
      res.density_mismatch =
          std::max(res.density_mismatch,
                   std::abs(ma_density(c.spectral, n) - rho_cont) / std::max(1.0, rho_cont));
    }
    if (at_stop) emit(t, s);
    return true;
  };

  std::vector<double> stops;
  for (double t : config.output_times)
    if (t < t_end) stops.push_back(t);
  stops.push_back(t_end);

  const auto& ic = config.integrator;
  const ode::StepControl ctl{ic.rel_tol, ic.abs_tol, ic.max_step, ic.min_step};
  const auto out = ode::drive_dopri5(rhs, 0.0, y, t_end, ctl, stops, observer);

  auto pole_estimate = [&]() -> double {
    // zero of the line through the last accepted (t, 1/max|U|)
    if (hist.size() >= 2) {
      const auto [t1, z1] = hist[hist.size() - 2];
      const auto [t2, z2] = hist.back();
      const double slope = (z2 - z1) / (t2 - t1);
      if (slope < 0.0) return t2 - z2 / slope;
    }
    return out.t;
  };

  if (blew_up) {
    res.termination = EnsembleTermination::blowup_detected;
    res.t_stop = pole_estimate();
    res.culprit_r0 = res.seeds[worst];
  } else if (crossed) {
    res.termination = EnsembleTermination::crossing_detected;
    res.t_stop = out.t;
  } else if (out.status == ode::DriveStatus::underflow) {
    res.termination = EnsembleTermination::blowup_detected;
    res.t_stop = pole_estimate();
    res.culprit_r0 = res.seeds[worst];
  } else {
    res.termination = EnsembleTermination::horizon_reached;
  }
  return res;
}

double bkm_monitor(std::span<const EulerianSnapshot> snapshots) {
  double total = 0.0;
  for (std::size_t k = 1; k < snapshots.size(); ++k)
    total += 0.5 * (snapshots[k].t - snapshots[k - 1].t) *
             (snapshots[k].bkm_integrand + snapshots[k - 1].bkm_integrand);
  return total;
}

GradientBound gradient_bound_check(const EulerianSnapshot& snapshot, double tol_interp) {
  double pmax = 0.0, qmax = 0.0;
  for (double v : snapshot.p) pmax = std::max(pmax, std::abs(v));
  for (double v : snapshot.q) qmax = std::max(qmax, std::abs(v));
  return {qmax <= pmax + tol_interp, pmax - qmax};
}

double pushforward_gap(const RadialProfile& profile, const EulerianSnapshot& snapshot) {
  const double t = snapshot.t;
  const double lo = flow_radius(profile, 0.0, t);
  const double hi = flow_radius(profile, profile.r_max(), t);
  double gap = 0.0;
  for (std::size_t j = 0; j < snapshot.grid.size(); ++j) {
    const double r = snapshot.grid[j];
    if (r < lo || r > hi) continue;
    const double r0 = invert_flow_radius(profile, r, t);
    gap = std::max(gap, std::abs(snapshot.rho[j] - pushforward_density(profile, r0, t)));
  }
  return gap;
}

double ensemble_energy(const RadialProfile& profile, std::span<const double> seeds,
                       std::span<const double> weights, const LagrangianFrame& frame,
                       double omega_n) {
  if (seeds.size() != weights.size() || seeds.size() != frame.chars.size())
    throw ConfigError("seeds, weights and frame differ in length");
  const int n = profile.dimension();
  const double kappa = profile.kappa();
  double e = 0.0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& c = frame.chars[i];
    const double phi_r = c.spectral.nu * c.r;
    e += weights[i] * (c.u * c.u + kappa * phi_r * phi_r) * derive_density(profile, seeds[i]) *
         std::pow(seeds[i], n - 1);
  }
  return 0.5 * omega_n * e;
}

}  // namespace ema
