#include "ema/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "ema/errors.hpp"
#include "ema/flow.hpp"
#include "ema/lagrange.hpp"
#include "ema/parallel.hpp"
#include "ema/profiles.hpp"
#include "ema/sweep.hpp"
#include "ema/threshold.hpp"

namespace ema {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Measured = std::vector<std::pair<std::string, double>>;

struct Outcome {
  bool passed = true;
  Measured measured;
  std::string detail;
};

std::mt19937_64 rng_for(const ValidateOptions& o, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

IntegratorConfig with_horizon(IntegratorConfig c, double horizon) {
  c.horizon = horizon;
  c.record_states = true;
  return c;
}

// 1. empirical threshold from bisection vs sqrt(kappa (1 - 2 h0))
Outcome sharpness(const ValidateOptions& o) {
  struct Case {
    double kappa, h0, found = 0;
  };
  std::vector<Case> cases;
  for (double k : {1.0, 4.0})
    for (double h : {-0.5, 0.0, 0.25, 0.4}) cases.push_back({k, h});
  IntegratorConfig cfg = o.integrator;
  cfg.record_states = false;
  parallel_for(cases.size(), o.threads,
               [&](std::size_t i) { cases[i].found = sharpness_bisect(cases[i].h0, cases[i].kappa, 200, cfg); });
  Outcome out;
  double worst = 0;
  std::ostringstream d;
  for (const auto& c : cases) {
    const double err = std::abs(c.found - std::sqrt(c.kappa * (1 - 2 * c.h0)));
    worst = std::max(worst, err);
    if (err > 1e-3) {
      out.passed = false;
      d << "kappa=" << c.kappa << " h0=" << c.h0 << " off by " << err << "; ";
    }
  }
  out.measured = {{"max_abs_error", worst}, {"cases", double(cases.size())}};
  out.detail = d.str();
  return out;
}

// 2. integrator blowup time vs the closed form on seeded supercritical points
Outcome blowup_times(const ValidateOptions& o) {
  auto rng = rng_for(o, 2);
  std::uniform_real_distribution<double> L(-4, 4), H(-1, 1.5);
  struct Pt {
    double lam, h, closed = 0, est = -1;
    bool detected = false;
  };
  std::vector<Pt> pts;
  while (pts.size() < 50) {
    const double lam = L(rng), h = H(rng);
    if (threshold_margin(lam, h, 1.0) < 0.0) pts.push_back({lam, h});
  }
  IntegratorConfig cfg = with_horizon(o.integrator, 200);
  cfg.record_states = false;
  parallel_for(pts.size(), o.threads, [&](std::size_t i) {
    auto& p = pts[i];
    p.closed = *blowup_time_closed_form(p.lam, p.h, 1.0);
    const double y0[2] = {p.lam, p.h};
    const Trajectory t = integrate({System::qnu, 1.0}, y0, cfg);
    p.detected = t.termination == Termination::blowup_detected;
    if (t.t_blowup) p.est = *t.t_blowup;
  });
  Outcome out;
  double worst = 0;
  std::ostringstream d;
  for (const auto& p : pts) {
    const double err = std::abs(p.est - p.closed);
    const double tol = std::max(1e-3, 1e-3 * p.closed);
    worst = std::max(worst, err / tol);
    if (!p.detected || err > tol) {
      out.passed = false;
      d << "(" << p.lam << "," << p.h << ") est=" << p.est << " closed=" << p.closed << "; ";
    }
  }
  out.measured = {{"max_error_over_tolerance", worst}, {"points", double(pts.size())}};
  out.detail = d.str();
  return out;
}

// 3. ellipse invariant on seeded subcritical (q0, nu0)
Outcome ellipse(const ValidateOptions& o) {
  auto rng = rng_for(o, 3);
  std::uniform_real_distribution<double> H(-1.0, 0.49), F(-0.95, 0.95);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 20; ++i) {
    const double h = H(rng);
    pts.emplace_back(F(rng) * std::sqrt(1 - 2 * h), h);
  }
  std::vector<double> drift(pts.size());
  std::vector<char> bounded(pts.size());
  const IntegratorConfig cfg = with_horizon(o.integrator, 50);
  parallel_for(pts.size(), o.threads, [&](std::size_t i) {
    const double y0[2] = {pts[i].first, pts[i].second};
    const Trajectory t = integrate({System::qnu, 1.0}, y0, cfg);
    bounded[i] = t.termination == Termination::horizon_reached;
    drift[i] = monitor_ellipse(t, 1.0);
  });
  Outcome out;
  const double worst = *std::max_element(drift.begin(), drift.end());
  out.passed = worst <= 1e-8 && std::all_of(bounded.begin(), bounded.end(), [](char b) { return b; });
  out.measured = {{"max_relative_drift", worst}, {"points", double(pts.size())}};
  return out;
}

// 4. swirl invariants J1, J2 and boundedness of the (q, nu, Theta/r) branch
Outcome swirl(const ValidateOptions& o) {
  auto rng = rng_for(o, 4);
  std::uniform_real_distribution<double> Q(-2, 2), N(-1, 0.9), T(0.1, 1.5);
  std::vector<std::array<double, 3>> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({Q(rng), N(rng), (i % 2 ? 1.0 : -1.0) * T(rng)});
  std::vector<double> j1(pts.size()), j2(pts.size());
  std::vector<char> bounded(pts.size());
  const IntegratorConfig cfg = with_horizon(o.integrator, 50);
  parallel_for(pts.size(), o.threads, [&](std::size_t i) {
    const Trajectory t = integrate({System::swirl_q_branch, 1.0}, pts[i], cfg);
    bounded[i] = t.termination == Termination::horizon_reached;
    const auto d = monitor_swirl_invariants(t, 1.0);
    j1[i] = d.at("J1");
    j2[i] = d.at("J2");
  });
  Outcome out;
  const double w1 = *std::max_element(j1.begin(), j1.end());
  const double w2 = *std::max_element(j2.begin(), j2.end());
  const auto n_bounded = std::count(bounded.begin(), bounded.end(), 1);
  out.passed = w1 <= 1e-8 && w2 <= 1e-8 && n_bounded == long(pts.size());
  out.measured = {{"max_drift_J1", w1}, {"max_drift_J2", w2}, {"bounded", double(n_bounded)},
                  {"points", double(pts.size())}};
  return out;
}

// 5. Euler-Poisson (q, nu) below nu = 1/n
Outcome euler_poisson(const ValidateOptions& o) {
  Outcome out;
  std::ostringstream d;
  IntegratorConfig cfg = with_horizon(o.integrator, 100);
  cfg.record_states = false;
  for (int n : {2, 3}) {
    auto rng = rng_for(o, 50 + n);
    std::uniform_real_distribution<double> Q(-5, 5), N(-1.0, 1.0 / n);
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 100; ++i) pts.push_back({Q(rng), N(rng)});
    std::vector<char> blew(pts.size());
    parallel_for(pts.size(), o.threads, [&](std::size_t i) {
      blew[i] = integrate({System::ep_qnu, 1.0, n}, pts[i], cfg).termination !=
                Termination::horizon_reached;
    });
    const auto count = std::count(blew.begin(), blew.end(), 1);
    out.measured.emplace_back("blowups_n" + std::to_string(n), double(count));
    if (count > 0) {
      out.passed = false;
      d << "n=" << n << ": " << count << "/100 runs exceeded the blowup magnitude; ";
    }
  }
  out.detail = d.str();
  return out;
}

struct PresetCase {
  const char* name;
  int n;
};
const PresetCase kEquivalenceCases[] = {
    {"subcritical_canonical", 2}, {"subcritical_canonical", 3},
    {"subcritical_bump", 2},      {"subcritical_bump", 3}};

EnsembleConfig equivalence_config(const ValidateOptions& o) {
  EnsembleConfig c;
  c.n_chars = 4096;
  c.output_times = {0.5, 1.0};
  c.integrator = o.integrator;
  return c;
}

// 6. lagrange density snapshots vs closed-form pushforward
Outcome equivalence(const ValidateOptions& o) {
  const std::size_t m = std::size(kEquivalenceCases);
  std::vector<double> gap(m);
  std::vector<char> ok(m);
  parallel_for(m, o.threads, [&](std::size_t i) {
    const auto p = make_profile({kEquivalenceCases[i].name, {}}, kEquivalenceCases[i].n, 1.0);
    const auto res = advance_ensemble(p, kTwoPi, equivalence_config(o));
    ok[i] = res.termination == EnsembleTermination::horizon_reached && res.snapshots.size() == 4;
    for (const auto& s : res.snapshots) gap[i] = std::max(gap[i], pushforward_gap(p, s));
  });
  Outcome out;
  std::ostringstream d;
  double worst = 0;
  for (std::size_t i = 0; i < m; ++i) {
    worst = std::max(worst, gap[i]);
    out.measured.emplace_back(std::string("gap_") + kEquivalenceCases[i].name + "_n" +
                                  std::to_string(kEquivalenceCases[i].n),
                              gap[i]);
    if (!ok[i] || gap[i] > 1e-4) {
      out.passed = false;
      d << kEquivalenceCases[i].name << " n=" << kEquivalenceCases[i].n << " failed; ";
    }
  }
  out.measured.insert(out.measured.begin(), {"max_density_gap", worst});
  out.detail = d.str();
  return out;
}

// 7. energy: closed form and lagrange trajectories
Outcome energy(const ValidateOptions& o) {
  const std::size_t m = std::size(kEquivalenceCases);
  std::vector<double> closed(m), lag(m);
  parallel_for(m, o.threads, [&](std::size_t i) {
    const auto p = make_profile({kEquivalenceCases[i].name, {}}, kEquivalenceCases[i].n, 1.0);
    const auto rule = gauss_legendre(256, 0.0, p.r_max());
    const std::vector<double> times{0.1, 1.0, 5.0, kTwoPi / std::sqrt(p.kappa())};
    const double e0 = conserved_energy(p, rule.nodes, rule.weights, 0.0);
    for (double t : times)
      closed[i] = std::max(closed[i], std::abs(conserved_energy(p, rule.nodes, rule.weights, t) - e0) /
                                          std::max(e0, 1e-300));
    EnsembleConfig c;
    c.seeds = rule.nodes;
    c.output_times = {times.begin(), times.end() - 1};
    c.integrator = o.integrator;
    const auto res = advance_ensemble(p, times.back(), c);
    const double l0 = ensemble_energy(p, res.seeds, rule.weights, res.frames.front());
    for (const auto& f : res.frames)
      lag[i] = std::max(lag[i], std::abs(ensemble_energy(p, res.seeds, rule.weights, f) - l0) /
                                    std::max(l0, 1e-300));
    if (res.frames.size() != times.size() + 1) lag[i] = INFINITY;
  });
  Outcome out;
  const double wc = *std::max_element(closed.begin(), closed.end());
  const double wl = *std::max_element(lag.begin(), lag.end());
  out.passed = wc <= 1e-10 && wl <= 1e-6;
  out.measured = {{"closed_form_max_relative_change", wc}, {"lagrange_max_relative_change", wl}};
  return out;
}

// 8. r (1 - nu) and Monge-Ampere vs continuity density along characteristics
Outcome path_invariants(const ValidateOptions& o) {
  const std::size_t m = std::size(kEquivalenceCases);
  std::vector<double> path(m), dens(m);
  parallel_for(m, o.threads, [&](std::size_t i) {
    const auto p = make_profile({kEquivalenceCases[i].name, {}}, kEquivalenceCases[i].n, 1.0);
    const auto res = advance_ensemble(p, kTwoPi, equivalence_config(o));
    path[i] = res.path_invariant_drift;
    dens[i] = res.density_mismatch;
  });
  Outcome out;
  const double wp = *std::max_element(path.begin(), path.end());
  const double wd = *std::max_element(dens.begin(), dens.end());
  out.passed = wp <= 1e-8 && wd <= 1e-6;
  out.measured = {{"max_path_invariant_drift", wp}, {"max_density_mismatch", wd}};
  return out;
}

// 9. profile verdicts identical in n = 2 and n = 3
Outcome dimension_independence(const ValidateOptions& o) {
  const std::vector<ProfilePreset> presets = {
      {"equilibrium", {}},
      {"subcritical_canonical", {}},
      {"subcritical_bump", {}},
      {"supercritical_canonical", {}},
      {"boundary_tuned", {}},
      {"boundary_tuned", {{"a", 0.3}, {"s", 2.0}}},
      {"quadratic_core", {{"a", 0.2}, {"b", -0.8}}},
      {"quadratic_core", {{"a", 0.1}, {"b", 1.5}}},
      {"quadratic_core", {{"a", 0.3}, {"c", -0.2}, {"w", 1.5}}},
      {"quadratic_core", {{"a", 0.15}, {"b", -0.9}, {"s", 0.5}}},
  };
  std::vector<char> same(presets.size());
  std::vector<std::string> cls(presets.size());
  parallel_for(presets.size(), o.threads, [&](std::size_t i) {
    const auto a = make_profile(presets[i], 2, 1.0);
    const auto b = make_profile(presets[i], 3, 1.0);
    const Verdict va = classify_profile(a, default_profile_grid(a));
    const Verdict vb = classify_profile(b, default_profile_grid(b));
    same[i] = va.cls == vb.cls && va.witness_r == vb.witness_r && va.t_blowup == vb.t_blowup;
    cls[i] = to_string(va.cls);
  });
  Outcome out;
  std::ostringstream d;
  long n_same = 0;
  for (std::size_t i = 0; i < presets.size(); ++i) {
    n_same += same[i];
    d << presets[i].name << ":" << cls[i] << (same[i] ? "" : "(differs)") << " ";
  }
  out.passed = n_same == long(presets.size());
  out.measured = {{"identical", double(n_same)}, {"presets", double(presets.size())}};
  out.detail = d.str();
  return out;
}

// 10. 41x41 pointwise phase diagram: analytic region and thread-independence
Outcome phase_diagram(const ValidateOptions&) {
  SweepSpec spec;  // lambda0 in [-2, 2], h0 in [-1, 0.45], 41 x 41, kappa = 1
  const SweepResult one = run_sweep(spec, 1);
  const SweepResult eight = run_sweep(spec, 8);
  long mismatched = 0;
  for (const auto& r : one.rows) {
    const bool sub = r.lambda0 * r.lambda0 < spec.kappa * (1 - 2 * r.h0);
    if (sub != (r.verdict.cls == VerdictClass::subcritical)) ++mismatched;
  }
  const bool identical = sweep_csv(one) == sweep_csv(eight);
  Outcome out;
  out.passed = mismatched == 0 && identical && one.rows.size() == 41u * 41u;
  out.measured = {{"nodes", double(one.rows.size())},
                  {"mismatched_nodes", double(mismatched)},
                  {"byte_identical_threads_1_vs_8", identical ? 1.0 : 0.0}};
  return out;
}

using CriterionFn = Outcome (*)(const ValidateOptions&);

struct Entry {
  CriterionInfo info;
  CriterionFn fn;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> e = {
      {{1, "threshold sharpness", 60}, sharpness},
      {{2, "closed-form vs numerical blowup time", 30}, blowup_times},
      {{3, "ellipse invariant", 20}, ellipse},
      {{4, "swirl conservation", 30}, swirl},
      {{5, "Euler-Poisson boundedness", 30}, euler_poisson},
      {{6, "geometric-Lagrangian equivalence", 60}, equivalence},
      {{7, "energy conservation", 20}, energy},
      {{8, "path invariants", 60}, path_invariants},
      {{9, "dimension independence of the threshold", 10}, dimension_independence},
      {{10, "phase-diagram golden sweep", 60}, phase_diagram},
  };
  return e;
}

}  // namespace

const std::vector<CriterionInfo>& criteria_catalog() {
  static const std::vector<CriterionInfo> c = [] {
    std::vector<CriterionInfo> v;
    for (const auto& e : entries()) v.push_back(e.info);
    return v;
  }();
  return c;
}

CriterionResult run_criterion(int id, const ValidateOptions& options) {
  const auto& all = entries();
  const auto it = std::find_if(all.begin(), all.end(), [&](const Entry& e) { return e.info.id == id; });
  if (it == all.end()) throw ConfigError("unknown validation criterion " + std::to_string(id));
  if (options.threads < 1) throw ConfigError("threads must be >= 1");

  CriterionResult r;
  r.id = id;
  r.name = it->info.name;
  r.budget_seconds = it->info.budget_seconds;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = it->fn(options);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    o.passed = false;
    o.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.within_budget = r.seconds < r.budget_seconds;
  r.passed = o.passed && r.within_budget;
  r.measured = std::move(o.measured);
  r.detail = std::move(o.detail);
  return r;
}

std::vector<CriterionResult> run_validation(const std::vector<int>& ids,
                                            const ValidateOptions& options) {
  if (ids.empty()) throw ConfigError("empty validation suite selection");
  std::set<int> seen;
  for (int id : ids) {
    if (!seen.insert(id).second) throw ConfigError("criterion " + std::to_string(id) + " selected twice");
    if (id < 1 || id > int(entries().size())) throw ConfigError("unknown validation criterion " + std::to_string(id));
  }
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, options));
  return out;
}

}  // namespace ema
