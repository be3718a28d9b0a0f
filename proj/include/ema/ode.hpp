#pragma once

// Dormand-Prince 5(4) embedded pair with a PI step-size controller
// (Hairer, Norsett & Wanner, Solving ODEs I, II.4 / DOPRI5 conventions).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ema::ode {

struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double min_step = 1e-14;
};

enum class DriveStatus {
  reached_end,  // integrated up to t_end
  stopped,      // observer requested termination
  underflow,    // controller asked for a step below min_step
};

struct DriveOutcome {
  DriveStatus status;
  double t;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace detail {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// 5th-order weights minus the embedded 4th-order ones
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

// Integrates y' = rhs(t, y) from t0 towards t_end, landing exactly on every
// time in `stops` (sorted, inside (t0, t_end]) and on t_end.
//
// rhs(double t, const std::vector<double>& y, std::vector<double>& dydt)
// observer(double t, const std::vector<double>& y, bool at_stop) -> bool
//   called after every accepted step; returning false stops the drive.
template <class Rhs, class Observer>
DriveOutcome drive_dopri5(Rhs&& rhs, double t0, std::vector<double>& y, double t_end,
                          const StepControl& ctl, std::span<const double> stops,
                          Observer&& observer) {
  using namespace detail;
  const std::size_t dim = y.size();
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  std::vector<double> ytmp(dim), ynew(dim);

  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double fac_min = 0.2, fac_max = 10.0;
  const double eps = std::numeric_limits<double>::epsilon();

  double t = t0;
  rhs(t, y, k1);

  auto scale = [&](double a, double b) {
    return ctl.abs_tol + ctl.rel_tol * std::max(std::abs(a), std::abs(b));
  };

  // initial step guess
  double h;
  {
    double dnf = 0, dny = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sk = scale(y[i], y[i]);
      dnf = std::max(dnf, std::abs(k1[i]) / sk);
      dny = std::max(dny, std::abs(y[i]) / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::clamp(h, ctl.min_step, ctl.max_step);
  }

  std::size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;

  double err_old = 1e-4;
  bool last_rejected = false;
  DriveOutcome out{DriveStatus::reached_end, t};

  while (t < t_end) {
    double target = t_end;
    if (next_stop < stops.size()) target = std::min(target, stops[next_stop]);
    bool lands = false;
    if (t + 1.01 * h >= target) {
      h = target - t;
      lands = true;
    }

    for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < dim; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < dim; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err = std::max(err, std::abs(ei) / scale(y[i], ynew[i]));
    }
    if (!std::isfinite(err)) err = 1e10;

    const double fac11 = std::pow(std::max(err, 1e-300), expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(err_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h / fac;
      err_old = std::max(err, 1e-4);

      t = lands ? target : t + h;
      y.swap(ynew);
      k1.swap(k7);
      ++out.accepted;
      const bool at_stop = lands && next_stop < stops.size() && target == stops[next_stop];
      if (at_stop) ++next_stop;
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      if (!observer(t, static_cast<const std::vector<double>&>(y), at_stop)) {
        out.status = DriveStatus::stopped;
        out.t = t;
        return out;
      }
      h = std::min(h_new, ctl.max_step);
    } else {
      const double h_new = h / std::min(1.0 / fac_min, fac11 / safe);
      ++out.rejected;
      last_rejected = true;
      if (h_new < ctl.min_step || h_new < 16.0 * eps * std::abs(t)) {
        out.status = DriveStatus::underflow;
        out.t = t;
        return out;
      }
      h = h_new;
    }
  }
  out.t = t;
  return out;
}

}  // namespace ema::ode
