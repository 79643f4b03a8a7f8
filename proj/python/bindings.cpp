// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "usvp/errors.hpp"
#include "usvp/mc_sim.hpp"
#include "usvp/rate_bounds.hpp"
#include "usvp/replica_solver.hpp"
#include "usvp/selection_stats.hpp"
#include "usvp/sweep.hpp"
#include "usvp/validation.hpp"

namespace py = pybind11;
using namespace usvp;

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the usvp package";

  py::register_exception<NoRoot>(m, "NoRoot", PyExc_RuntimeError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  py::enum_<Scheme>(m, "Scheme")
      .value("DdUsQpsk", Scheme::DdUsQpsk)
      .value("DdUsGaussian", Scheme::DdUsGaussian)
      .value("UsCvpQpsk", Scheme::UsCvpQpsk);
  py::enum_<Assumption>(m, "Assumption").value("RS", Assumption::RS).value("OneRSB", Assumption::OneRSB);
  py::enum_<Strategy>(m, "Strategy")
      .value("ZfbfFull", Strategy::ZfbfFull)
      .value("ZfbfRus", Strategy::ZfbfRus)
      .value("CvpRus", Strategy::CvpRus)
      .value("GreedyDdUs", Strategy::GreedyDdUs);

  m.def("q_function", &q_function, py::arg("x"));
  m.def("regularized_lower_gamma", &regularized_lower_gamma, py::arg("a"), py::arg("x"));

  py::class_<EnergyCdf>(m, "EnergyCdf")
      .def(py::init([](Scheme s, int T, double q) { return EnergyCdf(s, T, q); }), py::arg("scheme"),
           py::arg("T"), py::arg("q"))
      .def("cdf", &EnergyCdf::cdf, py::arg("x"))
      .def("quantile", &EnergyCdf::quantile, py::arg("kappa"))
      .def("truncated_mean", &EnergyCdf::truncated_mean, py::arg("kappa"))
      .def("truncated_variance", &EnergyCdf::truncated_variance, py::arg("kappa"))
      .def_property_readonly("mean", &EnergyCdf::mean)
      .def_property_readonly("atom", &EnergyCdf::atom);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init([](double alpha, double kappa, int T, Scheme s) { return SystemParams{alpha, kappa, T, s}; }),
           py::arg("alpha") = 4.0, py::arg("kappa") = 0.125, py::arg("T") = 64,
           py::arg("scheme") = Scheme::DdUsGaussian)
      .def_readwrite("alpha", &SystemParams::alpha)
      .def_readwrite("kappa", &SystemParams::kappa)
      .def_readwrite("T", &SystemParams::T)
      .def_readwrite("scheme", &SystemParams::scheme);
  py::class_<RsSolution>(m, "RsSolution")
      .def_readonly("q0", &RsSolution::q0)
      .def_readonly("penalty_per_user", &RsSolution::penalty_per_user)
      .def_readonly("residual", &RsSolution::residual);
  py::class_<OneRsbSolution>(m, "OneRsbSolution")
      .def_readonly("q1", &OneRsbSolution::q1)
      .def_readonly("chi", &OneRsbSolution::chi)
      .def_readonly("penalty_per_user", &OneRsbSolution::penalty_per_user)
      .def_readonly("residual_log", &OneRsbSolution::residual_log)
      .def_readonly("residual_ratio", &OneRsbSolution::residual_ratio);

  m.def("solve_rs", [](const SystemParams& p) { return solve_rs(p); }, py::arg("params"));
  m.def("solve_1rsb", [](const SystemParams& p) { return solve_1rsb(p); }, py::arg("params"));
  m.def("solve_rs_T_inf", &solve_rs_T_inf, py::arg("scheme"), py::arg("alpha"), py::arg("kappa"),
        py::arg("tol") = 1e-12);
  m.def("zfbf_asymptotic_penalty", &zfbf_asymptotic_penalty, py::arg("alpha"));

  py::class_<SelectionModel>(m, "SelectionModel")
      .def(py::init([](Scheme s, int T, double q, double kappa) { return SelectionModel(s, T, q, kappa); }),
           py::arg("scheme"), py::arg("T"), py::arg("q"), py::arg("kappa"))
      .def_property_readonly("xi", &SelectionModel::xi)
      .def_property_readonly("kappa", &SelectionModel::kappa);
  m.def("marginal_selection_probability", &marginal_selection_probability, py::arg("model"));
  m.def("modified_power_pdf_given_selected", &modified_power_pdf_given_selected, py::arg("model"),
        py::arg("power_grid"));
  m.def("conditional_output_pdf_gaussian",
        py::overload_cast<const SelectionModel&, double, const std::vector<double>&>(
            &conditional_output_pdf_gaussian),
        py::arg("model"), py::arg("snr"), py::arg("y_magnitudes"));

  m.def("qpsk_mi", &qpsk_mi, py::arg("snr_eff"));
  m.def(
      "sum_rate_bound_dd_us",
      [](const SystemParams& p, double snr, Assumption a, std::size_t mi_samples, std::uint64_t seed) {
        RateOptions ro;
        ro.mi_samples = mi_samples;
        ro.seed = seed;
        const RateResult r = sum_rate_bound_dd_us({p, snr, a}, ro);
        return py::dict(py::arg("bound") = r.bound, py::arg("mi_selected") = r.mi_selected,
                        py::arg("mi_std_error") = r.mi_std_error, py::arg("q") = r.q_used,
                        py::arg("kappa") = r.kappa_used);
      },
      py::arg("params"), py::arg("snr"), py::arg("assumption") = Assumption::RS,
      py::arg("mi_samples") = 1000000, py::arg("seed") = 1);
  m.def(
      "optimize_kappa",
      [](const SystemParams& p, double snr, Assumption a, int grid_size, std::size_t mi_samples) {
        OptimizeOptions oo;
        oo.grid_size = grid_size;
        oo.rate.mi_samples = mi_samples;
        const RateResult r = optimize_kappa(p, snr, a, oo);
        return py::dict(py::arg("bound") = r.bound, py::arg("kappa") = r.kappa_used, py::arg("q") = r.q_used);
      },
      py::arg("params"), py::arg("snr"), py::arg("assumption") = Assumption::RS, py::arg("grid_size") = 64,
      py::arg("mi_samples") = 1000000);
  m.def("cvp_rus_rate", &cvp_rus_rate, py::arg("alpha"), py::arg("alphakappa"), py::arg("snr"));
  m.def("cvp_rus_optimized", &cvp_rus_optimized, py::arg("alpha"), py::arg("snr"), py::arg("grid_size") = 64);

  py::class_<SimReport>(m, "SimReport")
      .def_readonly("mean", &SimReport::mean)
      .def_readonly("std_error", &SimReport::std_error)
      .def_readonly("trials", &SimReport::trials)
      .def_readonly("failed", &SimReport::failed)
      .def_readonly("Ktilde", &SimReport::Ktilde);
  m.def(
      "empirical_penalty",
      [](int N, int K, int Ktilde, int T, Scheme s, int trials, std::uint64_t seed, Strategy st) {
        return empirical_penalty({N, K, Ktilde, T, s, trials, seed}, st);
      },
      py::arg("N"), py::arg("K"), py::arg("Ktilde"), py::arg("T"), py::arg("scheme"), py::arg("trials"),
      py::arg("seed"), py::arg("strategy"));

  m.def(
      "run_sweep",
      [](const std::string& command, Scheme s, const std::vector<Assumption>& assumptions, double alpha,
         const std::string& alphakappa_grid, int T, const std::string& snr_db_grid, std::uint64_t seed) {
        SweepConfig c;
        c.command = command;
        c.scheme = s;
        c.assumptions = assumptions;
        c.alpha = alpha;
        c.alphakappa = parse_grid(alphakappa_grid);
        c.T = T;
        c.snr_db = parse_grid(snr_db_grid);
        c.seed = seed;
        const auto problems = c.problems();
        if (!problems.empty()) {
          std::string all;
          for (const auto& p : problems) all += (all.empty() ? "" : "; ") + p;
          throw std::invalid_argument(all);
        }
        if (command == "penalty-sweep") return run_penalty_sweep(c).csv;
        if (command == "rate-sweep") return run_rate_sweep(c).csv;
        throw std::invalid_argument("run_sweep: command must be penalty-sweep or rate-sweep");
      },
      py::arg("command"), py::arg("scheme") = Scheme::DdUsGaussian,
      py::arg("assumptions") = std::vector<Assumption>{Assumption::RS}, py::arg("alpha") = 4.0,
      py::arg("alphakappa_grid") = "0.1:0.9:9", py::arg("T") = 64, py::arg("snr_db_grid") = "5",
      py::arg("seed") = 1);
  m.def(
      "run_validation",
      [](const std::string& suite) {
        std::ostringstream out;
        const ValidationReport rep = run_validation(suite, out);
        py::list rows;
        for (const auto& r : rep.results) {
          const char* st = r.status == CheckStatus::Pass   ? "pass"
                           : r.status == CheckStatus::Fail ? "fail"
                           : r.status == CheckStatus::Warn ? "warn"
                                                           : "unmet";
          rows.append(py::dict(py::arg("id") = r.id, py::arg("name") = r.name, py::arg("status") = st,
                               py::arg("detail") = r.detail));
        }
        return rows;
      },
      py::arg("suite"));
}
