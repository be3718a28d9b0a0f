#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ema/spectral.hpp"
#include "ema/threshold.hpp"

namespace ema {

struct Axis {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  // count == 1 yields {min}; otherwise min + (max - min) i / (count - 1).
  double at(int i) const;
  void validate(const char* name) const;  // ConfigError
};

enum class SweepMode { pointwise_threshold, swirl_sigma };
const char* to_string(SweepMode mode);
SweepMode sweep_mode_from(const std::string& name);  // ConfigError

struct SweepSpec {
  SweepMode mode = SweepMode::pointwise_threshold;
  double kappa = 1.0;
  Axis lambda0{-2.0, 2.0, 41};
  Axis h0{-1.0, 0.45, 41};
  Axis theta{0.0, 0.0, 1};  // swirl_sigma only: Theta_r = Theta/r = theta
  // swirl_sigma only; unset means default_sigma_horizon(kappa)
  std::optional<double> horizon;
  IntegratorConfig integrator;

  void validate() const;
};

struct SweepRow {
  double lambda0;
  double h0;
  double theta;
  Verdict verdict;
};

struct SweepResult {
  SweepMode mode;
  std::vector<SweepRow> rows;  // lexicographic (lambda0, h0, theta) index order
};

// Evaluates every grid node; `threads` workers pull node indices and write
// into preallocated slots, so the output order never depends on scheduling.
SweepResult run_sweep(const SweepSpec& spec, int threads = 1);

// Columns: lambda0,h0[,theta],verdict,t_blowup (empty when absent).
void write_sweep_csv(const SweepResult& result, std::ostream& out);
std::string sweep_csv(const SweepResult& result);

}  // namespace ema
