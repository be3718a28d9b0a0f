#include "ema/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "ema/errors.hpp"
#include "ema/flow.hpp"
#include "ema/format.hpp"
#include "ema/lagrange.hpp"
#include "ema/threshold.hpp"
#include "ema/validate.hpp"
#include "json.hpp"

namespace ema {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using Json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(key + ": cannot parse '" + raw + "' as a number");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  if (trim(raw).empty()) return out;
  std::stringstream ss(raw);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number<T>(key, item));
  return out;
}

// Keys allowed per section; [profile] is open (its keys are preset parameters).
const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"run", {"n", "kappa", "seed", "threads"}},
      {"profile", {}},
      {"integrator", {"rel_tol", "abs_tol", "max_step", "min_step", "blowup_magnitude"}},
      {"simulate", {"t_end", "n_chars", "grid_size", "output_times"}},
      {"classify", {"grid_count"}},
      {"sweep",
       {"mode", "lambda0_min", "lambda0_max", "lambda0_count", "h0_min", "h0_max", "h0_count",
        "theta_min", "theta_max", "theta_count", "horizon"}},
      {"validate", {"suites"}},
  };
  return k;
}

// Section -> ordered (key, value). Later writes to a key replace its value
// but keep its first position.
using Sections = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;

void put(Sections& s, const std::string& section, const std::string& key, const std::string& value) {
  const auto& known = known_keys();
  const auto it = known.find(section);
  if (it == known.end()) throw ConfigError("unknown section [" + section + "]");
  if (section != "profile" && !it->second.count(key))
    throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  auto& entries = s[section];
  for (auto& [k, v] : entries)
    if (k == key) {
      v = value;
      return;
    }
  entries.emplace_back(key, value);
}

Sections read_ini(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read config file '" + file.string() + "'");
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config " + file.string() + ": " + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  Sections s;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : body) put(s, section, key, trim(value.data()));
  }
  return s;
}

void apply_sections(RunConfig& c, const Sections& s) {
  for (const auto& [section, entries] : s) {
    for (const auto& [key, v] : entries) {
      const std::string k = section + "." + key;
      if (section == "run") {
        if (key == "n") c.n = parse_number<int>(k, v);
        else if (key == "kappa") c.kappa = parse_number<double>(k, v);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(k, v);
        else if (key == "threads") c.threads = parse_number<int>(k, v);
      } else if (section == "profile") {
        if (key == "preset") c.profile.name = trim(v);
        else c.profile.params.emplace_back(key, parse_number<double>(k, v));
      } else if (section == "integrator") {
        const double x = parse_number<double>(k, v);
        if (key == "rel_tol") c.integrator.rel_tol = x;
        else if (key == "abs_tol") c.integrator.abs_tol = x;
        else if (key == "max_step") c.integrator.max_step = x;
        else if (key == "min_step") c.integrator.min_step = x;
        else if (key == "blowup_magnitude") c.integrator.blowup_magnitude = x;
      } else if (section == "simulate") {
        if (key == "t_end") c.t_end = parse_number<double>(k, v);
        else if (key == "n_chars") c.n_chars = parse_number<int>(k, v);
        else if (key == "grid_size") c.grid_size = parse_number<int>(k, v);
        else if (key == "output_times") c.output_times = parse_list<double>(k, v);
      } else if (section == "classify") {
        c.grid_count = parse_number<int>(k, v);
      } else if (section == "sweep") {
        auto& sw = c.sweep;
        if (key == "mode") sw.mode = sweep_mode_from(trim(v));
        else if (key == "horizon") sw.horizon = parse_number<double>(k, v);
        else {
          const auto cut = key.rfind('_');
          const std::string axis = key.substr(0, cut), field = key.substr(cut + 1);
          Axis& a = axis == "lambda0" ? sw.lambda0 : axis == "h0" ? sw.h0 : sw.theta;
          if (field == "min") a.min = parse_number<double>(k, v);
          else if (field == "max") a.max = parse_number<double>(k, v);
          else a.count = parse_number<int>(k, v);
        }
      } else if (section == "validate") {
        if (trim(v) == "all") {
          c.suites.clear();
          for (const auto& info : criteria_catalog()) c.suites.push_back(info.id);
        } else {
          c.suites = parse_list<int>(k, v);
        }
      }
    }
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory '" + out.string() + "'");
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json profile_json(const RunConfig& c) {
  Json params = Json::object();
  for (const auto& [k, v] : c.profile.params) params[k] = v;
  return {{"preset", c.profile.name}, {"params", params}, {"n", c.n}, {"kappa", c.kappa}};
}

RadialProfile build_profile(const RunConfig& c) {
  if (c.profile.name.empty()) throw ConfigError("missing profile.preset");
  return make_profile(c.profile, c.n, c.kappa);
}

Json verdict_json(const ProfileClassification& pc) {
  return {{"class", to_string(pc.verdict.cls)},
          {"witness_r", optional_json(pc.verdict.witness_r)},
          {"t_blowup", optional_json(pc.verdict.t_blowup)},
          {"margin_p", pc.margin_p},
          {"margin_q", pc.margin_q},
          {"vacuum_witness", pc.vacuum_witness}};
}

void error_line(const std::string& kind, const std::string& message) {
  std::cerr << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

void RunConfig::validate() const {
  if (n < 1) throw ConfigError("run.n must be >= 1");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("run.kappa must be positive");
  if (threads < 1) throw ConfigError("run.threads must be >= 1");
  IntegratorConfig probe = integrator;
  probe.horizon = 1.0;
  probe.validate();
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("simulate.t_end must be positive");
  if (n_chars < 2) throw ConfigError("simulate.n_chars must be >= 2");
  if (grid_size < 2) throw ConfigError("simulate.grid_size must be >= 2");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (!(output_times[i] > 0.0 && output_times[i] < t_end))
      throw ConfigError("simulate.output_times must lie in (0, t_end)");
    if (i > 0 && !(output_times[i] > output_times[i - 1]))
      throw ConfigError("simulate.output_times must be increasing");
  }
  if (grid_count < 1) throw ConfigError("classify.grid_count must be >= 1");
  sweep.validate();
}

RunConfig load_run_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides) {
  Sections s;
  if (file) s = read_ini(*file);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("--set expects section.key=value, got '" + o + "'");
    put(s, trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)), trim(o.substr(eq + 1)));
  }
  RunConfig c;
  apply_sections(c, s);
  c.sweep.kappa = c.kappa;
  c.sweep.integrator = c.integrator;
  return c;
}

int cmd_simulate(const RunConfig& c, const fs::path& out) {
  c.validate();
  const RadialProfile profile = build_profile(c);
  EnsembleConfig ec;
  ec.n_chars = c.n_chars;
  ec.grid_size = c.grid_size;
  ec.output_times = c.output_times;
  ec.integrator = c.integrator;
  prepare_out(out);

  const EnsembleResult res = advance_ensemble(profile, c.t_end, ec);
  const auto pc = classify_profile_detailed(profile, default_profile_grid(profile, c.grid_count));

  std::ostringstream csv;
  csv << "t,r,rho,u,p,q,mu,nu\n";
  for (const auto& s : res.snapshots)
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      csv << shortest(s.t) << ',' << shortest(s.grid[i]) << ',' << shortest(s.rho[i]) << ','
          << shortest(s.u[i]) << ',' << shortest(s.p[i]) << ',' << shortest(s.q[i]) << ','
          << shortest(s.mu[i]) << ',' << shortest(s.nu[i]) << '\n';
  write_file(out / "snapshots.csv", csv.str());

  bool bound_holds = true;
  double bound_margin = INFINITY;
  double flow_gap = 0.0;
  bool gap_valid = true;
  Json times = Json::array();
  for (const auto& s : res.snapshots) {
    times.push_back(s.t);
    const GradientBound g = gradient_bound_check(s);
    bound_holds = bound_holds && g.holds;
    bound_margin = std::min(bound_margin, g.margin);
    // the closed-form flow is only invertible before the first fold
    if (s.post_blowup || (pc.verdict.t_blowup && s.t >= *pc.verdict.t_blowup)) continue;
    try {
      flow_gap = std::max(flow_gap, pushforward_gap(profile, s));
    } catch (const Error&) {
      gap_valid = false;
    }
  }

  const bool blowup = res.termination == EnsembleTermination::blowup_detected;
  const bool crossing = res.termination == EnsembleTermination::crossing_detected;
  Json d;
  d["command"] = "simulate";
  d["profile"] = profile_json(c);
  d["t_end"] = c.t_end;
  d["n_chars"] = c.n_chars;
  d["grid_size"] = c.grid_size;
  d["termination"] = to_string(res.termination);
  d["t_blowup"] = blowup ? optional_json(res.t_stop) : Json(nullptr);
  d["t_crossing"] = crossing ? optional_json(res.t_stop) : Json(nullptr);
  d["culprit_r0"] = optional_json(res.culprit_r0);
  d["closed_form"] = verdict_json(pc);
  d["invariant_drift"] = {{"path_invariant", res.path_invariant_drift},
                          {"density_mismatch", res.density_mismatch}};
  d["bkm_integral"] = bkm_monitor(res.snapshots);
  d["gradient_bound"] = {{"holds", bound_holds}, {"min_margin", bound_margin}};
  d["flow_gap"] = gap_valid ? Json(flow_gap) : Json(nullptr);
  d["snapshot_times"] = times;
  write_file(out / "diagnostics.json", d.dump(2) + "\n");
  return blowup || crossing ? kExitSingularity : kExitOk;
}

int cmd_classify(const RunConfig& c, const fs::path& out) {
  c.validate();
  const RadialProfile profile = build_profile(c);
  prepare_out(out);
  const auto pc = classify_profile_detailed(profile, default_profile_grid(profile, c.grid_count));
  Json r = verdict_json(pc);
  r["profile"] = profile_json(c);
  r["grid_count"] = c.grid_count;
  const std::string text = r.dump(2) + "\n";
  write_file(out / "report.json", text);
  std::cout << text;
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, const fs::path& out) {
  c.validate();
  prepare_out(out);
  const SweepResult res = run_sweep(c.sweep, c.threads);
  write_file(out / "sweep.csv", sweep_csv(res));
  return kExitOk;
}

int cmd_validate(const RunConfig& c, const fs::path& out) {
  c.validate();
  prepare_out(out);
  ValidateOptions o;
  o.seed = c.seed;
  o.threads = c.threads;
  o.integrator = c.integrator;
  const auto results = run_validation(c.suites, o);

  // wall-clock times go to stdout only so report.json stays reproducible
  Json criteria = Json::array();
  bool all = true;
  for (const auto& r : results) {
    Json m = Json::object();
    for (const auto& [k, v] : r.measured) m[k] = v;
    criteria.push_back({{"id", r.id},
                        {"name", r.name},
                        {"passed", r.passed},
                        {"within_budget", r.within_budget},
                        {"budget_seconds", r.budget_seconds},
                        {"measured", m},
                        {"detail", r.detail}});
    std::printf("%s %2d %-42s %.2fs\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
    all = all && r.passed;
  }
  Json rep{{"command", "validate"}, {"seed", c.seed}, {"all_passed", all}, {"criteria", criteria}};
  write_file(out / "report.json", rep.dump(2) + "\n");
  return all ? kExitOk : kExitValidationFailed;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Euler-alignment spectral dynamics: simulate, classify, sweep, validate"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  std::vector<std::string> sets;
  std::string out = ".";
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "INI run configuration");
  app.add_option("--set", sets, "override, section.key=value (repeatable)");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--seed", seed, "seed for sampled initial points");
  const std::vector<std::pair<std::string, int (*)(const RunConfig&, const fs::path&)>> cmds = {
      {"simulate", cmd_simulate}, {"classify", cmd_classify}, {"sweep", cmd_sweep}, {"validate", cmd_validate}};
  for (const auto& [name, fn] : cmds) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("UsageError", e.what());
    return kExitError;
  }

  try {
    RunConfig c = load_run_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt, sets);
    if (threads) c.threads = *threads;
    if (seed) c.seed = *seed;
    for (const auto& [name, fn] : cmds)
      if (app.got_subcommand(name)) return fn(c, out);
  } catch (const Error& e) {
    error_line(e.kind(), e.what());
  } catch (const std::exception& e) {
    error_line("InternalError", e.what());
  }
  return kExitError;
}

}  // namespace ema
