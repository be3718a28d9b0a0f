#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ema/errors.hpp"
#include "ema/lagrange.hpp"
#include "ema/profiles.hpp"
#include "ema/spectral.hpp"
#include "ema/sweep.hpp"
#include "ema/threshold.hpp"
#include "ema/validate.hpp"

namespace py = pybind11;
using namespace ema;

namespace {

System system_from(const std::string& name) {
  for (System s : {System::qnu, System::pmu, System::swirl, System::swirl_q_branch, System::ep_qnu,
                   System::wv})
    if (name == to_string(s)) return s;
  throw ConfigError("unknown system '" + name + "'");
}

IntegratorConfig integrator(double horizon, double rel_tol, double abs_tol, double max_step) {
  IntegratorConfig c;
  c.horizon = horizon;
  c.rel_tol = rel_tol;
  c.abs_tol = abs_tol;
  c.max_step = max_step;
  return c;
}

ProfilePreset preset(const std::string& name, const std::map<std::string, double>& params) {
  return {name, {params.begin(), params.end()}};
}

}  // namespace

PYBIND11_MODULE(_ema, m) {
  m.doc() = "Spectral dynamics of the radial Euler-alignment system";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DomainError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<Verdict>(m, "Verdict")
      .def_property_readonly("cls", [](const Verdict& v) { return std::string(to_string(v.cls)); })
      .def_readonly("t_blowup", &Verdict::t_blowup)
      .def_readonly("witness_r", &Verdict::witness_r)
      .def_readonly("horizon", &Verdict::horizon)
      .def("__repr__", [](const Verdict& v) { return std::string("<Verdict ") + to_string(v.cls) + ">"; });

  m.def("threshold_margin", &threshold_margin, py::arg("lambda0"), py::arg("h0"), py::arg("kappa") = 1.0);
  m.def("classify_point", &classify_point, py::arg("lambda0"), py::arg("h0"), py::arg("kappa") = 1.0);
  m.def("blowup_time_closed_form", &blowup_time_closed_form, py::arg("lambda0"), py::arg("h0"),
        py::arg("kappa") = 1.0);
  m.def("flow_factor", &flow_factor, py::arg("lambda0"), py::arg("h0"), py::arg("kappa"), py::arg("t"));

  m.def(
      "integrate",
      [](const std::string& system, std::vector<double> y0, double kappa, int n, double horizon,
         double rel_tol, double abs_tol, double max_step) {
        const Trajectory t = integrate({system_from(system), kappa, n}, y0,
                                       integrator(horizon, rel_tol, abs_tol, max_step));
        py::dict d;
        d["times"] = t.times;
        d["states"] = t.states;
        d["termination"] = to_string(t.termination);
        d["t_blowup"] = t.t_blowup;
        return d;
      },
      py::arg("system"), py::arg("y0"), py::arg("kappa") = 1.0, py::arg("n") = 2,
      py::arg("horizon") = 100.0, py::arg("rel_tol") = 1e-10, py::arg("abs_tol") = 1e-12,
      py::arg("max_step") = 0.1);

  m.def("presets", [] {
    std::vector<std::string> names;
    for (const auto& p : preset_catalog()) names.push_back(p.name);
    return names;
  });

  m.def(
      "classify_profile",
      [](const std::string& name, const std::map<std::string, double>& params, int n, double kappa,
         int grid_count) {
        const auto p = make_profile(preset(name, params), n, kappa);
        return classify_profile(p, default_profile_grid(p, grid_count));
      },
      py::arg("preset"), py::arg("params") = std::map<std::string, double>{}, py::arg("n") = 2,
      py::arg("kappa") = 1.0, py::arg("grid_count") = 512);

  py::class_<EulerianSnapshot>(m, "Snapshot")
      .def_readonly("t", &EulerianSnapshot::t)
      .def_readonly("r", &EulerianSnapshot::grid)
      .def_readonly("rho", &EulerianSnapshot::rho)
      .def_readonly("u", &EulerianSnapshot::u)
      .def_readonly("p", &EulerianSnapshot::p)
      .def_readonly("q", &EulerianSnapshot::q)
      .def_readonly("mu", &EulerianSnapshot::mu)
      .def_readonly("nu", &EulerianSnapshot::nu);

  py::class_<EnsembleResult>(m, "EnsembleResult")
      .def_readonly("snapshots", &EnsembleResult::snapshots)
      .def_property_readonly("termination",
                             [](const EnsembleResult& r) { return std::string(to_string(r.termination)); })
      .def_readonly("t_stop", &EnsembleResult::t_stop)
      .def_readonly("culprit_r0", &EnsembleResult::culprit_r0)
      .def_readonly("path_invariant_drift", &EnsembleResult::path_invariant_drift)
      .def_readonly("density_mismatch", &EnsembleResult::density_mismatch);

  m.def(
      "simulate",
      [](const std::string& name, const std::map<std::string, double>& params, int n, double kappa,
         double t_end, int n_chars, int grid_size, std::vector<double> output_times) {
        EnsembleConfig c;
        c.n_chars = n_chars;
        c.grid_size = grid_size;
        c.output_times = std::move(output_times);
        py::gil_scoped_release release;
        return advance_ensemble(make_profile(preset(name, params), n, kappa), t_end, c);
      },
      py::arg("preset"), py::arg("params") = std::map<std::string, double>{}, py::arg("n") = 2,
      py::arg("kappa") = 1.0, py::arg("t_end") = 1.0, py::arg("n_chars") = 1024,
      py::arg("grid_size") = 257, py::arg("output_times") = std::vector<double>{});

  m.def(
      "sweep",
      [](const std::string& mode, std::tuple<double, double, int> lambda0,
         std::tuple<double, double, int> h0, std::tuple<double, double, int> theta, double kappa,
         std::optional<double> horizon, int threads) {
        SweepSpec s;
        s.mode = sweep_mode_from(mode);
        s.lambda0 = {std::get<0>(lambda0), std::get<1>(lambda0), std::get<2>(lambda0)};
        s.h0 = {std::get<0>(h0), std::get<1>(h0), std::get<2>(h0)};
        s.theta = {std::get<0>(theta), std::get<1>(theta), std::get<2>(theta)};
        s.kappa = kappa;
        s.horizon = horizon;
        std::string csv;
        {
          py::gil_scoped_release release;
          csv = sweep_csv(run_sweep(s, threads));
        }
        return csv;
      },
      py::arg("mode") = "pointwise_threshold", py::arg("lambda0") = std::make_tuple(-2.0, 2.0, 41),
      py::arg("h0") = std::make_tuple(-1.0, 0.45, 41), py::arg("theta") = std::make_tuple(0.0, 0.0, 1),
      py::arg("kappa") = 1.0, py::arg("horizon") = std::nullopt, py::arg("threads") = 1,
      "Runs a parameter sweep and returns the sweep.csv text.");

  m.def("criteria", [] {
    std::vector<std::pair<int, std::string>> out;
    for (const auto& c : criteria_catalog()) out.emplace_back(c.id, c.name);
    return out;
  });

  m.def(
      "run_criterion",
      [](int id, std::uint64_t seed, int threads) {
        ValidateOptions o;
        o.seed = seed;
        o.threads = threads;
        CriterionResult r;
        {
          py::gil_scoped_release release;
          r = run_criterion(id, o);
        }
        py::dict d;
        d["id"] = r.id;
        d["name"] = r.name;
        d["passed"] = r.passed;
        d["seconds"] = r.seconds;
        py::dict measured;
        for (const auto& [k, v] : r.measured) measured[py::str(k)] = v;
        d["measured"] = measured;
        d["detail"] = r.detail;
        return d;
      },
      py::arg("id"), py::arg("seed") = 20240917, py::arg("threads") = 1);
}
