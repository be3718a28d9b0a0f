#include "ema/sweep.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "ema/errors.hpp"
#include "ema/format.hpp"
#include "ema/parallel.hpp"

namespace ema {

double Axis::at(int i) const {
  if (count == 1) return min;
  if (i == count - 1) return max;
  return min + (max - min) * i / (count - 1);
}

void Axis::validate(const char* name) const {
  if (count < 1) throw ConfigError(std::string(name) + ".count must be >= 1");
  if (!std::isfinite(min) || !std::isfinite(max) || max < min)
    throw ConfigError(std::string(name) + " range must be finite with min <= max");
}

const char* to_string(SweepMode mode) {
  return mode == SweepMode::pointwise_threshold ? "pointwise_threshold" : "swirl_sigma";
}

SweepMode sweep_mode_from(const std::string& name) {
  if (name == "pointwise_threshold") return SweepMode::pointwise_threshold;
  if (name == "swirl_sigma") return SweepMode::swirl_sigma;
  throw ConfigError("unknown sweep mode '" + name + "'");
}

void SweepSpec::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  lambda0.validate("lambda0");
  h0.validate("h0");
  theta.validate("theta");
  if (horizon && !(*horizon > 0.0)) throw ConfigError("sweep horizon must be positive");
  if (mode == SweepMode::swirl_sigma) {
    IntegratorConfig probe = integrator;
    probe.horizon = 1.0;
    probe.validate();
  }
}

SweepResult run_sweep(const SweepSpec& spec, int threads) {
  spec.validate();
  if (threads < 1) throw ConfigError("threads must be >= 1");
  const bool swirl = spec.mode == SweepMode::swirl_sigma;
  const int nt = swirl ? spec.theta.count : 1;
  const std::size_t total =
      static_cast<std::size_t>(spec.lambda0.count) * spec.h0.count * nt;

  SweepResult res;
  res.mode = spec.mode;
  res.rows.resize(total);
  const double horizon = spec.horizon.value_or(default_sigma_horizon(spec.kappa));

  auto eval = [&](std::size_t k) {
    const int it = static_cast<int>(k % nt);
    const int ih = static_cast<int>((k / nt) % spec.h0.count);
    const int il = static_cast<int>(k / nt / spec.h0.count);
    SweepRow row{spec.lambda0.at(il), spec.h0.at(ih), swirl ? spec.theta.at(it) : 0.0, {}};
    if (swirl) {
      SwirlState s{row.lambda0, row.lambda0, row.h0, row.h0, row.theta, row.theta};
      row.verdict = sigma_membership(s, spec.kappa, horizon, spec.integrator);
    } else {
      row.verdict = classify_point(row.lambda0, row.h0, spec.kappa);
    }
    res.rows[k] = row;
  };

  parallel_for(total, threads, eval);
  return res;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  const bool swirl = result.mode == SweepMode::swirl_sigma;
  out << (swirl ? "lambda0,h0,theta,verdict,t_blowup\n" : "lambda0,h0,verdict,t_blowup\n");
  for (const auto& r : result.rows) {
    out << shortest(r.lambda0) << ',' << shortest(r.h0) << ',';
    if (swirl) out << shortest(r.theta) << ',';
    out << to_string(r.verdict.cls) << ',';
    if (r.verdict.t_blowup) out << shortest(*r.verdict.t_blowup);
    out << '\n';
  }
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  write_sweep_csv(result, os);
  return os.str();
}

}  // namespace ema
