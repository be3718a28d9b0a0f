#include "ema/interp.hpp"

#include <algorithm>
#include <cmath>

#include "ema/errors.hpp"

namespace ema {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw DomainError("interpolation needs >= 2 matching points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw DomainError("interpolation abscissae not increasing");

  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }

  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i)
    d_[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
  // one-sided three-point end slopes
  d_[0] = ((2 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
  d_[n - 1] = ((2 * h[n - 2] + h[n - 3]) * delta[n - 2] - h[n - 2] * delta[n - 3]) /
              (h[n - 2] + h[n - 3]);

  auto limit = [](double d, double secant_bound_sign, double bound) {
    if (d * secant_bound_sign <= 0.0) return 0.0;
    return std::copysign(std::min(std::abs(d), bound), d);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const bool has_left = i > 0;
    const bool has_right = i + 1 < n;
    const double dl = has_left ? delta[i - 1] : delta[i];
    const double dr = has_right ? delta[i] : delta[i - 1];
    if (dl * dr <= 0.0) {
      d_[i] = 0.0;
      continue;
    }
    d_[i] = limit(d_[i], dl, 3.0 * std::min(std::abs(dl), std::abs(dr)));
  }
}

double MonotoneCubic::operator()(double xq) const {
  if (xq <= x_.front()) return y_.front();
  if (xq >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double s = (xq - x_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

std::vector<double> MonotoneCubic::operator()(std::span<const double> xq) const {
  std::vector<double> out;
  out.reserve(xq.size());
  for (double v : xq) out.push_back((*this)(v));
  return out;
}

}  // namespace ema
