#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ema/spectral.hpp"

namespace ema {

struct CriterionInfo {
  int id;
  std::string name;
  double budget_seconds;
};

// The ten cross-representation checks, in id order 1..10.
const std::vector<CriterionInfo>& criteria_catalog();

struct ValidateOptions {
  std::uint64_t seed = 20240917;  // seeds the sampled initial points
  int threads = 1;
  // Tolerances and step limits for every integration; horizons are set per
  // criterion.
  IntegratorConfig integrator;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool within_budget = true;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<std::pair<std::string, double>> measured;  // ordered for stable output
  std::string detail;
};

// ConfigError for an unknown id.
CriterionResult run_criterion(int id, const ValidateOptions& options);

// ConfigError for an empty or duplicated selection: validating nothing is an
// error, not a vacuous success.
std::vector<CriterionResult> run_validation(const std::vector<int>& ids,
                                            const ValidateOptions& options);

}  // namespace ema
