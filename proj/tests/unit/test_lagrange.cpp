#include <cmath>
#include <numbers>

#include "doctest.h"

#include "ema/errors.hpp"
#include "ema/flow.hpp"
#include "ema/lagrange.hpp"
#include "ema/threshold.hpp"

using namespace ema;

namespace {

constexpr double kPi = std::numbers::pi;

RadialProfile preset(const std::string& name, int n, double kappa = 1.0) {
  return make_profile({name, {}}, n, kappa);
}

// max over grid points inside the flowed hull of |rho_snapshot - rho_flow|
double density_gap(const RadialProfile& p, const EulerianSnapshot& s) {
  const double lo = flow_radius(p, 0.0, s.t), hi = flow_radius(p, p.r_max(), s.t);
  double gap = 0.0;
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    const double r = s.grid[j];
    if (r < lo || r > hi) continue;
    const double r0 = invert_flow_radius(p, r, s.t);
    gap = std::max(gap, std::abs(s.rho[j] - pushforward_density(p, r0, s.t)));
  }
  return gap;
}

}  // namespace

TEST_CASE("equilibrium ensemble stays at rest") {
  const auto eq = preset("equilibrium", 2);
  EnsembleConfig c;
  c.n_chars = 64;
  c.output_times = {0.5, 1.0};
  const auto res = advance_ensemble(eq, 2.0, c);
  CHECK(res.termination == EnsembleTermination::horizon_reached);
  REQUIRE(res.snapshots.size() == 4);
  CHECK(res.snapshots.front().t == 0.0);
  CHECK(res.snapshots.back().t == 2.0);
  for (const auto& s : res.snapshots) {
    for (std::size_t j = 0; j < s.grid.size(); ++j) {
      CHECK(s.rho[j] == 1.0);
      CHECK(s.u[j] == 0.0);
      CHECK(s.p[j] == 0.0);
      CHECK(s.q[j] == 0.0);
      CHECK(s.mu[j] == 0.0);
      CHECK(s.nu[j] == 0.0);
    }
    CHECK(s.bkm_integrand == 0.0);
    CHECK_FALSE(s.post_blowup);
    const auto g = gradient_bound_check(s);
    CHECK(g.holds);
    CHECK(g.margin == 0.0);
  }
  CHECK(bkm_monitor(res.snapshots) == 0.0);
}

TEST_CASE("ensemble agrees with the closed-form flow") {
  for (const char* name : {"subcritical_canonical", "subcritical_bump"}) {
    for (int n : {2, 3}) {
      const auto p = preset(name, n);
      EnsembleConfig c;
      c.n_chars = 4096;  // resolves the steep bump flank near r = 2.3
      c.output_times = {0.5, 1.0};
      const double T = 2 * kPi;
      const auto res = advance_ensemble(p, T, c);
      REQUIRE(res.termination == EnsembleTermination::horizon_reached);
      CHECK(res.path_invariant_drift <= 1e-8);
      CHECK(res.density_mismatch <= 1e-6);
      for (const auto& s : res.snapshots) {
        CHECK_MESSAGE(density_gap(p, s) <= 1e-4, name, " n=", n, " t=", s.t);
        CHECK(gradient_bound_check(s).holds);
        CHECK_FALSE(s.post_blowup);
      }
      for (const auto& f : res.frames) {
        for (std::size_t i = 0; i < f.chars.size(); ++i) {
          CHECK(std::abs(f.chars[i].r - flow_radius(p, res.seeds[i], f.t)) <= 1e-6);
          if (i > 0) CHECK(f.chars[i].r > f.chars[i - 1].r);
        }
      }
    }
  }
}

TEST_CASE("ensemble energy") {
  const auto p = preset("subcritical_bump", 3);
  const auto rule = gauss_legendre(256, 0.0, p.r_max());
  EnsembleConfig c;
  c.seeds = rule.nodes;
  c.output_times = {0.1, 1.0, 5.0};
  const auto res = advance_ensemble(p, 2 * kPi, c);
  REQUIRE(res.frames.size() == 5);
  const double e0 = ensemble_energy(p, res.seeds, rule.weights, res.frames.front());
  CHECK(e0 == doctest::Approx(conserved_energy(p, rule.nodes, rule.weights, 0.0)).epsilon(1e-14));
  for (const auto& f : res.frames) {
    const double e = ensemble_energy(p, res.seeds, rule.weights, f);
    CHECK(std::abs(e - e0) / e0 <= 1e-6);
  }
}

TEST_CASE("supercritical ensemble stops at the closed-form time") {
  const auto p = preset("supercritical_canonical", 2);
  EnsembleConfig c;
  const auto res = advance_ensemble(p, 5.0, c);
  CHECK(res.termination == EnsembleTermination::blowup_detected);
  double tc = 1e300;
  for (double r0 : res.seeds)
    if (auto t = positive_definite_horizon(p, r0)) tc = std::min(tc, *t);
  REQUIRE(res.t_stop);
  CHECK(std::abs(*res.t_stop - tc) <= 1e-2);
  REQUIRE(res.culprit_r0);
  CHECK(*res.culprit_r0 == 0.0);
}

TEST_CASE("BKM integral") {
  const auto sub = preset("subcritical_canonical", 2);
  EnsembleConfig c;
  c.n_chars = 256;
  for (int k = 1; k < 100; ++k) c.output_times.push_back(0.1 * k);
  const auto res = advance_ensemble(sub, 10.0, c);
  REQUIRE(res.termination == EnsembleTermination::horizon_reached);
  double umax = 0;
  for (const auto& s : res.snapshots) umax = std::max(umax, s.bkm_integrand);
  const double b = bkm_monitor(res.snapshots);
  CHECK(std::isfinite(b));
  CHECK(b > 0.0);
  CHECK(b <= 10 * umax);

  // canonical supercritical preset: the integral keeps growing towards T_c
  const auto sup = preset("supercritical_canonical", 2);
  const double tc = *positive_definite_horizon(sup, 0.0);
  EnsembleConfig cs;
  cs.n_chars = 256;
  for (int k = 1; k <= 100; ++k) cs.output_times.push_back(0.5 * tc * k / 100);
  // clustered towards 0.99 T_c
  for (int k = 1; k <= 200; ++k)
    cs.output_times.push_back(tc * (1.0 - 0.5 * std::pow(0.02, k / 200.0)));
  const auto rs = advance_ensemble(sup, 0.99 * tc, cs);
  CHECK(rs.termination == EnsembleTermination::horizon_reached);
  std::vector<EulerianSnapshot> half;
  for (const auto& s : rs.snapshots)
    if (s.t <= 0.5 * tc * (1 + 1e-12)) half.push_back(s);
  const double b_half = bkm_monitor(half);
  const double b_late = bkm_monitor(rs.snapshots);
  CHECK(rs.snapshots.back().t == doctest::Approx(0.99 * tc).epsilon(1e-14));
  CHECK(b_late >= 10 * b_half);
}

TEST_CASE("gradient bound negative control") {
  EulerianSnapshot s;
  s.grid = {0, 1, 2};
  s.p = {0.1, 0.2, 0.1};
  s.q = {0.1, 0.9, 0.1};
  s.rho = s.u = s.mu = s.nu = {0, 0, 0};
  const auto g = gradient_bound_check(s);
  CHECK_FALSE(g.holds);
  CHECK(g.margin == doctest::Approx(-0.7));
}

TEST_CASE("characteristic crossing") {
  // only the p-branch fails, near r = 1: sparse seeds straddling it cross
  const double c = 0.6 * std::exp(0.5);
  RadialProfile::Fields f;
  f.u0 = [c](double r) { return c * r * r * r * std::exp(-r * r / 2); };
  f.du0 = [c](double r) { return c * (3 * r * r - r * r * r * r) * std::exp(-r * r / 2); };
  f.dphi0 = f.d2phi0 = [](double) { return 0.0; };
  f.d3phi0_origin = 0.0;
  const RadialProfile p(2, 1.0, 4.0, f);
  // seeds 0.7 and 1.3 are subcritical themselves but the fold between them
  // makes R_t(1.3) - R_t(0.7) = 0.6 + (u0(1.3) - u0(0.7)) sin t change sign
  EnsembleConfig cfg;
  cfg.seeds = {0.0, 0.7, 1.3, 3.0};
  const auto res = advance_ensemble(p, 10.0, cfg);
  CHECK(res.termination == EnsembleTermination::crossing_detected);
  REQUIRE(res.culprit_r0);
  CHECK(*res.culprit_r0 == 0.7);
  REQUIRE(res.t_stop);
  const double t_cross = kPi + std::asin(0.6 / (f.u0(1.3) - f.u0(0.7)));
  CHECK(*res.t_stop >= t_cross);
  CHECK(*res.t_stop - t_cross <= cfg.integrator.max_step);
  CHECK(t_cross > *blowup_time_closed_form(1.2, 0.0, 1.0));
}

TEST_CASE("ensemble config errors") {
  const auto eq = preset("equilibrium", 2);
  EnsembleConfig c;
  c.n_chars = 1;
  CHECK_THROWS_AS(advance_ensemble(eq, 1.0, c), ConfigError);
  c = {};
  CHECK_THROWS_AS(advance_ensemble(eq, 0.0, c), ConfigError);
  c.seeds = {0.5, 0.2};
  CHECK_THROWS_AS(advance_ensemble(eq, 1.0, c), ConfigError);
  c.seeds = {0.5, 5.0};
  CHECK_THROWS_AS(advance_ensemble(eq, 1.0, c), DomainError);
  c = {};
  c.output_times = {0.5, 0.4};
  CHECK_THROWS_AS(advance_ensemble(eq, 1.0, c), ConfigError);
}
