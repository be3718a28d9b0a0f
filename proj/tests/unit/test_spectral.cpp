#include <cmath>
#include <random>

#include "doctest.h"

#include "ema/errors.hpp"
#include "ema/spectral.hpp"

using namespace ema;

namespace {

// first root of f on (0, t_hi] by scanning then bisecting
template <class F>
double first_root(F f, double t_hi, int scan = 100000) {
  double a = 0.0, fa = f(0.0);
  for (int i = 1; i <= scan; ++i) {
    double b = t_hi * i / scan;
    const double fb = f(b);
    if (fa * fb <= 0.0) {
      for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (a + b);
        if (f(a) * f(m) <= 0.0) b = m; else a = m;
      }
      return 0.5 * (a + b);
    }
    a = b;
    fa = fb;
  }
  return -1.0;
}

IntegratorConfig cfg(double horizon) {
  IntegratorConfig c;
  c.horizon = horizon;
  return c;
}

}  // namespace

TEST_CASE("rhs examples") {
  CHECK(rhs_qnu({0, 0}, 1) == Vec2{0, 0});
  CHECK(rhs_qnu({1, 0}, 1) == Vec2{-1, 1});
  const Vec2 d = rhs_qnu({0.5, 0.2}, 2);
  CHECK(d[0] == doctest::Approx(-0.65).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.4).epsilon(1e-15));

  CHECK(rhs_pmu({0, 0}, 1) == Vec2{0, 0});
  CHECK(rhs_pmu({-1, 0.5}, 1) == Vec2{-1.5, -0.5});

  CHECK(rhs_swirl({}, 1) == SwirlState{});
  SwirlState s;
  s.theta_over_r = 1;
  const SwirlState ds = rhs_swirl(s, 1);
  CHECK(ds.q == 1);
  CHECK(ds.nu == 0);
  CHECK(ds.theta_over_r == 0);
  CHECK(ds.p == -1);
  CHECK(ds.mu == 0);
  CHECK(ds.theta_r == 0);

  for (int n : {2, 3, 5}) {
    const Vec2 e = rhs_ep_qnu({1, 1.0 / n}, 1.5, n);
    CHECK(e[0] == doctest::Approx(-1 - 1.5 / n));
    CHECK(e[1] == 0);
  }
  const Vec2 ep = rhs_ep_qnu({0.3, 0.1}, 1, 3);
  CHECK(ep[0] == doctest::Approx(-0.19).epsilon(1e-14));
  CHECK(ep[1] == doctest::Approx(0.21).epsilon(1e-14));

  CHECK(rhs_wv({0, 1}, 1, 0) == Vec2{0, 0});
  CHECK(rhs_wv({1, 0}, 1, 0) == Vec2{1, 1});
  CHECK(rhs_wv({0, 1}, 1, 1) == Vec2{1, 0});
  CHECK_THROWS_AS(rhs_wv({0, 0}, 1, 1), SingularInput);
}

TEST_CASE("rhs structural properties on random points") {
  std::mt19937_64 rng(20241);
  std::uniform_real_distribution<double> U(-10, 10), K(0.1, 10);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x{U(rng), U(rng)};
    const double k = K(rng);
    CHECK(rhs_pmu(x, k) == rhs_qnu(x, k));
    CHECK(rhs_ep_qnu(x, k, 1) == rhs_qnu(x, k));

    SwirlState s{U(rng), U(rng), U(rng), U(rng), 0.0, 0.0};
    const SwirlState d = rhs_swirl(s, k);
    const Vec2 dq = rhs_qnu({s.q, s.nu}, k);
    const Vec2 dp = rhs_pmu({s.p, s.mu}, k);
    CHECK(d.q == dq[0]);
    CHECK(d.nu == dq[1]);
    CHECK(d.p == dp[0]);
    CHECK(d.mu == dp[1]);
    CHECK(d.theta_r == 0.0);
    CHECK(d.theta_over_r == 0.0);
  }
  for (int n = 1; n <= 4; ++n) CHECK(rhs_ep_qnu({0, 0}, 2, n) == Vec2{0, 0});
  CHECK(rhs_wv({0, 1}, 3, 0) == Vec2{0, 0});
}

TEST_CASE("integrate: equilibrium and termination kinds") {
  const double zero[2] = {0, 0};
  const Trajectory t0 = integrate({System::qnu, 1.0}, zero, cfg(100));
  CHECK(t0.termination == Termination::horizon_reached);
  CHECK(t0.times.back() == 100.0);
  CHECK(t0.times.size() == t0.states.size());
  for (const auto& s : t0.states) {
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
  }
  for (std::size_t i = 1; i < t0.times.size(); ++i) CHECK(t0.times[i] > t0.times[i - 1]);

  const double vac[2] = {0, 1.5};
  const Trajectory t1 = integrate({System::qnu, 1.0}, vac, cfg(100));
  REQUIRE(t1.termination == Termination::blowup_detected);
  REQUIRE(t1.t_blowup);
  CHECK(t1.states.back()[0] < -1e6);
  CHECK(t1.states.back()[1] > 1e3);
  CHECK(t1.invariant_drift.empty());

  CHECK_THROWS_AS(integrate({System::qnu, 1.0}, zero, [] {
                    IntegratorConfig c;
                    c.min_step = 1.0;
                    return c;
                  }()),
                  ConfigError);
  const double three[3] = {0, 0, 0};
  CHECK_THROWS_AS(integrate({System::qnu, 1.0}, three, cfg(1)), ConfigError);
}

TEST_CASE("integrate: blowup time of (q, nu) = (-1.2, 0)") {
  // independent oracle: first root of 1 + q0 sin t
  const double oracle = first_root([](double t) { return 1.0 - 1.2 * std::sin(t); }, 3.0);
  CHECK(oracle == doctest::Approx(0.98511078333774).epsilon(1e-12));
  const double y0[2] = {-1.2, 0.0};
  const Trajectory t = integrate({System::qnu, 1.0}, y0, cfg(100));
  REQUIRE(t.termination == Termination::blowup_detected);
  CHECK(std::abs(*t.t_blowup - oracle) <= 1e-3);
}

TEST_CASE("ellipse monitor") {
  const double zero[2] = {0, 0};
  CHECK(monitor_ellipse(integrate({System::qnu, 1.0}, zero, cfg(10)), 1.0) == 0.0);

  const double y0[2] = {0.5, 0.0};
  const Trajectory t = integrate({System::qnu, 1.0}, y0, cfg(50));
  CHECK(t.termination == Termination::horizon_reached);
  CHECK(monitor_ellipse(t, 1.0) <= 1e-8);
  CHECK(t.invariant_drift.at("ellipse") == monitor_ellipse(t, 1.0));

  // I(0) from (q, nu) and from the matching (w, v) state
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> Q(-3, 3), N(-2, 0.9);
  for (int i = 0; i < 100; ++i) {
    const double q = Q(rng), nu = N(rng), k = 1.7;
    const double w = q / (1 - nu), v = 1 / (1 - nu);
    CHECK(std::abs(ellipse_invariant(q, nu, k) - (w * w + k * (1 - v) * (1 - v))) <= 1e-10);
  }

  Trajectory bad;
  bad.system = System::qnu;
  bad.times = {0, 1};
  bad.states = {{0, 0}, {0, 1.0}};
  CHECK_THROWS_AS(monitor_ellipse(bad, 1.0), SingularInput);
}

TEST_CASE("ellipse conservation on random subcritical points") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> H(-1.0, 0.45), F(-0.95, 0.95);
  const IntegratorConfig c = cfg(50);
  for (int i = 0; i < 20; ++i) {
    const double h = H(rng), k = 1.0;
    const double lam = F(rng) * std::sqrt(k * (1 - 2 * h));
    const double y0[2] = {lam, h};
    const Trajectory t = integrate({System::qnu, k}, y0, c);
    CHECK(t.termination == Termination::horizon_reached);
    CHECK(monitor_ellipse(t, k) <= 100 * c.rel_tol);
  }
}

TEST_CASE("(w, v) integration reproduces the ellipse") {
  const double q0 = 0.4, nu0 = 0.1, k = 2.0;
  const double wv0[2] = {q0 / (1 - nu0), 1 / (1 - nu0)};
  const Trajectory t = integrate({System::wv, k, 2, 0.0}, wv0, cfg(20));
  REQUIRE(t.termination == Termination::horizon_reached);
  const double i0 = ellipse_invariant(q0, nu0, k);
  for (const auto& s : t.states) {
    const double i = s[0] * s[0] + k * (1 - s[1]) * (1 - s[1]);
    CHECK(std::abs(i - i0) <= 1e-8);
  }
}

TEST_CASE("swirl invariants") {
  const SwirlInvariants z = swirl_invariants(0.3, 0.2, 0.0, 1.5);
  CHECK(z.j1 == 0.0);
  CHECK(z.j2 == doctest::Approx(ellipse_invariant(0.3, 0.2, 1.5)).epsilon(1e-15));

  // doubling C0 quadruples the v^-2 term
  const double q = 0.1, nu = 0.3, k = 1.0;
  const double base = swirl_invariants(q, nu, 0.0, k).j2;
  const double t1 = swirl_invariants(q, nu, 0.0, k, 0.7).j2 - base;
  const double t2 = swirl_invariants(q, nu, 0.0, k, 1.4).j2 - base;
  CHECK(t2 == doctest::Approx(4 * t1).epsilon(1e-12));

  const double y0[3] = {0.0, 0.0, 0.5};
  const Trajectory t = integrate({System::swirl_q_branch, 1.0}, y0, cfg(50));
  CHECK(t.termination == Termination::horizon_reached);
  const auto d = monitor_swirl_invariants(t, 1.0);
  CHECK(d.at("J1") <= 1e-8);
  CHECK(d.at("J2") <= 1e-8);

  SwirlState s;
  s.theta_over_r = 0.5;
  const auto y6 = s.to_array();
  const Trajectory full = integrate({System::swirl, 1.0}, y6, cfg(50));
  // the p-branch is driven by -(Theta/r)^2 and blows up; J1, J2 live on the q-branch
  CHECK(full.termination == Termination::blowup_detected);
  CHECK(full.invariant_drift.at("J1") <= 1e-8);
  CHECK(full.invariant_drift.at("J2") <= 1e-8);
}

TEST_CASE("swirl conservation on random states") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> Q(-2, 2), N(-1, 0.9), T(0.1, 1.5);
  const IntegratorConfig c = cfg(50);
  for (int i = 0; i < 20; ++i) {
    const double y0[3] = {Q(rng), N(rng), (i % 2 ? 1 : -1) * T(rng)};
    const Trajectory t = integrate({System::swirl_q_branch, 1.0}, y0, c);
    CHECK(t.termination == Termination::horizon_reached);
    const auto d = monitor_swirl_invariants(t, 1.0);
    CHECK(d.at("J1") <= 100 * c.rel_tol);
    CHECK(d.at("J2") <= 100 * c.rel_tol);
  }
}

TEST_CASE("convergence order: halving the step cuts the drift by 4x or more") {
  // fixed steps: tolerances far above the local error, so max_step governs
  auto drift = [](double h) {
    IntegratorConfig c;
    c.horizon = 20;
    c.rel_tol = c.abs_tol = 1.0;
    c.max_step = h;
    c.min_step = h / 4;
    const double y0[2] = {0.5, 0.0};
    return monitor_ellipse(integrate({System::qnu, 1.0}, y0, c), 1.0);
  };
  const double d1 = drift(0.2), d2 = drift(0.1);
  CHECK(d1 > 0.0);
  CHECK(d2 * 4 <= d1);
}

// Oracle for the exact EP excursion. With x = r/r0 and s0 = 1 - n nu0 the path
// obeys x'' = -(k/n) x + (k s0/n) x^(1-n), x(0) = 1, x'(0) = q0, a conservative
// oscillator; nu is most negative at the inner turning point x_min, where
// nu = (1 - s0 x_min^-n)/n.
static double ep_peak_nu(double q0, double nu0, double k, int n) {
  const double s0 = 1 - n * nu0;
  auto V = [&](double x) {
    const double core = n == 2 ? -0.5 * k * s0 * std::log(x)
                               : k * s0 / (n * (n - 2.0)) * std::pow(x, 2.0 - n);
    return k * x * x / (2.0 * n) + core;
  };
  const double E = 0.5 * q0 * q0 + V(1.0);
  double lo = -800.0, hi = 0.0;  // log x
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (V(std::exp(m)) > E ? lo : hi) = m;
  }
  return std::abs((1 - s0 * std::exp(-n * hi)) / n);
}

TEST_CASE("Euler-Poisson boundedness below nu = 1/n, n = 3") {
  const int n = 3;
  std::mt19937_64 rng(1000 + n);
  std::uniform_real_distribution<double> Q(-5, 5), N(-1.0, 1.0 / n);
  for (int i = 0; i < 100; ++i) {
    const double y0[2] = {Q(rng), N(rng)};
    IntegratorConfig c;
    c.horizon = 100;
    c.record_states = false;
    const Trajectory t = integrate({System::ep_qnu, 1.0, n}, y0, c);
    CHECK_MESSAGE(t.termination == Termination::horizon_reached, "q0=", y0[0], " nu0=", y0[1]);
  }
}

TEST_CASE("Euler-Poisson, n = 2: bounded exactly, detected as bounded below the magnitude cap") {
  // The n = 2 excursion grows like exp(2 q0^2 / (k s0)): the solution is
  // bounded but can exceed any fixed blowup magnitude. The detector must agree
  // with the exact peak away from the cap.
  const int n = 2;
  std::mt19937_64 rng(1000 + n);
  std::uniform_real_distribution<double> Q(-5, 5), N(-1.0, 1.0 / n);
  int below = 0, above = 0;
  for (int i = 0; i < 100; ++i) {
    const double y0[2] = {Q(rng), N(rng)};
    const double peak = ep_peak_nu(y0[0], y0[1], 1.0, n);
    IntegratorConfig c;
    c.horizon = 100;
    c.record_states = false;
    const Trajectory t = integrate({System::ep_qnu, 1.0, n}, y0, c);
    if (peak < 1e8) {
      ++below;
      CHECK_MESSAGE(t.termination == Termination::horizon_reached, "q0=", y0[0], " nu0=", y0[1]);
    } else if (peak > 1e10) {
      ++above;
      CHECK(t.termination == Termination::blowup_detected);
    }
  }
  CHECK(below > 50);
  CHECK(above > 0);
}

TEST_CASE("EP excursion oracle matches integration") {
  // moderate case fully resolvable by the integrator
  const double y0[2] = {-1.5, 0.0};
  IntegratorConfig c;
  c.horizon = 10;
  const Trajectory t = integrate({System::ep_qnu, 1.0, 2}, y0, c);
  double peak = 0;
  for (const auto& s : t.states) peak = std::max(peak, std::abs(s[1]));
  CHECK(peak == doctest::Approx(ep_peak_nu(-1.5, 0.0, 1.0, 2)).epsilon(1e-3));
}
