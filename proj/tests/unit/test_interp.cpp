#include <cmath>
#include <random>

#include "doctest.h"

#include "ema/errors.hpp"
#include "ema/interp.hpp"

using ema::MonotoneCubic;

TEST_CASE("interpolant reproduces linear data and nodes") {
  std::vector<double> x{0, 0.3, 1.0, 1.1, 2.5}, y;
  for (double v : x) y.push_back(2 * v - 1);
  const MonotoneCubic f(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(f(x[i]) == doctest::Approx(y[i]).epsilon(1e-15));
  for (double t = 0; t <= 2.5; t += 0.01) CHECK(f(t) == doctest::Approx(2 * t - 1).epsilon(1e-13));
  CHECK(f(-1.0) == -1.0);
  CHECK(f(9.0) == 4.0);
}

TEST_CASE("monotone data stays monotone, no overshoot at steps") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<double> x{0}, y{0};
  for (int i = 1; i < 60; ++i) {
    x.push_back(x.back() + 0.01 + U(rng));
    y.push_back(y.back() + (U(rng) < 0.3 ? 0.0 : std::pow(U(rng), 4) * 10));
  }
  const MonotoneCubic f(x, y);
  double prev = f(x.front());
  for (double t = x.front(); t <= x.back(); t += 1e-3) {
    const double v = f(t);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("smooth data converges at high order") {
  auto err = [](int m) {
    std::vector<double> x, y;
    for (int i = 0; i <= m; ++i) {
      x.push_back(3.0 * i / m);
      y.push_back(std::exp(-x.back()));
    }
    const MonotoneCubic f(x, y);
    double e = 0;
    for (double t = 0; t <= 3; t += 1e-3) e = std::max(e, std::abs(f(t) - std::exp(-t)));
    return e;
  };
  CHECK(err(40) / err(80) > 6.0);
}

TEST_CASE("interpolant input errors") {
  CHECK_THROWS_AS(MonotoneCubic({0}, {1}), ema::DomainError);
  CHECK_THROWS_AS(MonotoneCubic({0, 1}, {1}), ema::DomainError);
  CHECK_THROWS_AS(MonotoneCubic({0, 0}, {1, 2}), ema::DomainError);
}
