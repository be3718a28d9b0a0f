#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ema/profiles.hpp"
#include "ema/spectral.hpp"
#include "ema/sweep.hpp"

namespace ema {

// Everything a subcommand needs. Grammar and defaults are documented in
// README.md; load_run_config is the only constructor used by the tool.
struct RunConfig {
  // [run]
  int n = 2;
  double kappa = 1.0;
  std::uint64_t seed = 20240917;
  int threads = 1;
  // [profile]; an empty name is rejected by simulate and classify
  ProfilePreset profile;
  // [integrator]
  IntegratorConfig integrator;
  // [simulate]
  double t_end = 6.283185307179586;
  int n_chars = 1024;
  int grid_size = 257;
  std::vector<double> output_times;
  // [classify]
  int grid_count = 512;
  // [sweep]; kappa and integrator are copied from the sections above
  SweepSpec sweep;
  // [validate]
  std::vector<int> suites{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  void validate() const;  // ConfigError
};

// Reads the INI file (if any), then applies "section.key=value" overrides in
// order. ConfigError on unknown sections/keys or malformed values, IoError if
// the file cannot be read.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides);

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitSingularity = 2,
  kExitValidationFailed = 3,
};

int cmd_simulate(const RunConfig& config, const std::filesystem::path& out);
int cmd_classify(const RunConfig& config, const std::filesystem::path& out);
int cmd_sweep(const RunConfig& config, const std::filesystem::path& out);
int cmd_validate(const RunConfig& config, const std::filesystem::path& out);

// Whole command line: parsing, dispatch and the stderr error line.
int run_cli(int argc, char** argv);

}  // namespace ema
