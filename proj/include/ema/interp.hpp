#pragma once

#include <span>
#include <vector>

namespace ema {

// Piecewise-monotone cubic Hermite interpolant. Slopes start from the
// three-point (second-order) estimate and are limited so that each interval
// stays monotone: zero at data extrema, at most 3x the adjacent secants
// elsewhere. Outside [x.front(), x.back()] the end values are held.
class MonotoneCubic {
 public:
  // x must be strictly increasing with at least two points.
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double xq) const;
  std::vector<double> operator()(std::span<const double> xq) const;

 private:
  std::vector<double> x_, y_, d_;
};

}  // namespace ema
