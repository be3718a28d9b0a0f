#include <cmath>
#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "ema/errors.hpp"
#include "ema/format.hpp"
#include "ema/sweep.hpp"

using namespace ema;

TEST_CASE("shortest round-trips") {
  CHECK(shortest(0.1) == "0.1");
  CHECK(shortest(-2.0) == "-2");
  CHECK(shortest(1e-300) == "1e-300");
  CHECK(shortest(NAN) == "nan");
  CHECK(shortest(-INFINITY) == "-inf");
  for (double x : {M_PI, 1.0 / 3.0, 6.02214076e23, -4.9e-324})
    CHECK(std::strtod(shortest(x).c_str(), nullptr) == x);
}

TEST_CASE("axis nodes") {
  CHECK(Axis{0.5, 3.0, 1}.at(0) == 0.5);
  const Axis a{-1.0, 0.45, 41};
  CHECK(a.at(0) == -1.0);
  CHECK(a.at(40) == 0.45);
  CHECK(a.at(20) == doctest::Approx(-0.275));
  CHECK_THROWS_AS(Axis({0, 1, 0}).validate("x"), ConfigError);
  CHECK_THROWS_AS(Axis({1, 0, 3}).validate("x"), ConfigError);
  CHECK_THROWS_AS(sweep_mode_from("grid"), ConfigError);
}

TEST_CASE("pointwise sweep matches the threshold at every node") {
  SweepSpec s;
  const auto r = run_sweep(s, 3);
  REQUIRE(r.rows.size() == 41u * 41u);
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const auto& row = r.rows[k];
    CHECK(row.lambda0 == s.lambda0.at(int(k / 41)));
    CHECK(row.h0 == s.h0.at(int(k % 41)));
    const bool sub = row.lambda0 * row.lambda0 < 1 - 2 * row.h0;
    CHECK(sub == (row.verdict.cls == VerdictClass::subcritical));
    CHECK(row.verdict.t_blowup.has_value() == !sub);
  }
}

TEST_CASE("csv format and thread independence") {
  SweepSpec s;
  s.lambda0 = {-1, 1, 2};
  s.h0 = {0, 0.5, 2};
  const std::string csv = sweep_csv(run_sweep(s, 1));
  CHECK(csv.substr(0, csv.find('\n')) == "lambda0,h0,verdict,t_blowup");
  CHECK(csv.find("\n-1,0,supercritical,") == std::string::npos);  // 1 < 1 is false: boundary
  CHECK(csv.find("\n-1,0,boundary,") != std::string::npos);
  CHECK(csv.find("\n1,0.5,supercritical,") != std::string::npos);

  SweepSpec big;
  big.lambda0.count = 101;
  big.h0.count = 77;
  CHECK(sweep_csv(run_sweep(big, 1)) == sweep_csv(run_sweep(big, 8)));
}

TEST_CASE("single cell at the origin") {
  SweepSpec s;
  s.lambda0 = {0, 0, 1};
  s.h0 = {0, 0, 1};
  CHECK(sweep_csv(run_sweep(s)) == "lambda0,h0,verdict,t_blowup\n0,0,subcritical,\n");
}

TEST_CASE("zero-swirl slice reproduces the pointwise boundary within one cell") {
  SweepSpec point;
  point.lambda0 = {-2, 2, 21};
  point.h0 = {-1, 0.45, 15};
  SweepSpec swirl = point;
  swirl.mode = SweepMode::swirl_sigma;
  swirl.horizon = 60;
  const auto a = run_sweep(point, 2), b = run_sweep(swirl, 2);
  REQUIRE(a.rows.size() == b.rows.size());
  const double dl = 4.0 / 20, dh = 1.45 / 14;
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const bool sa = a.rows[k].verdict.cls == VerdictClass::subcritical;
    const bool sb = b.rows[k].verdict.cls == VerdictClass::subcritical;
    if (sa == sb) continue;
    // disagreement only next to the analytic boundary
    const double l = a.rows[k].lambda0, h = a.rows[k].h0;
    bool near = false;
    for (double x : {-1.0, 0.0, 1.0})
      for (double y : {-1.0, 0.0, 1.0}) {
        const double ll = l + x * dl, hh = h + y * dh;
        near = near || ((ll * ll < 1 - 2 * hh) != (l * l < 1 - 2 * h));
      }
    CHECK_MESSAGE(near, "lambda0=" << l << " h0=" << h);
  }
  CHECK(b.rows.front().verdict.horizon == 60.0);
}

TEST_CASE("swirl sweep columns") {
  SweepSpec s;
  s.mode = SweepMode::swirl_sigma;
  s.lambda0 = {0, 0, 1};
  s.h0 = {0, 0, 1};
  s.theta = {0, 0.5, 2};
  s.horizon = 10;
  const std::string csv = sweep_csv(run_sweep(s));
  CHECK(csv == "lambda0,h0,theta,verdict,t_blowup\n0,0,0,subcritical,\n0,0,0.5,subcritical,\n");
}
