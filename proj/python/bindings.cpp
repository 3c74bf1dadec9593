// Python bindings for the dftlim core: grids, models, energy terms,
// single-nucleus solves, cell-energy evaluators, and allocation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <vector>

#include "dftlim/allocate.hpp"
#include "dftlim/errors.hpp"
#include "dftlim/functionals.hpp"
#include "dftlim/gb.hpp"
#include "dftlim/grid.hpp"
#include "dftlim/io.hpp"
#include "dftlim/ltable.hpp"
#include "dftlim/model.hpp"
#include "dftlim/single_nucleus.hpp"

namespace py = pybind11;
using namespace dftlim;

namespace {

py::dict kkt_to_dict(const KktReport& k) {
  py::dict d;
  d["ok"] = k.ok;
  d["max_stationarity"] = k.max_stationarity;
  d["feasibility_excess"] = k.feasibility_excess;
  d["complementarity"] = k.complementarity;
  d["caps_respected"] = k.caps_respected;
  d["notes"] = k.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Semiclassical-limit solvers for density-functional models: radial "
      "grids, energy terms, single-nucleus value functions, limit cell "
      "energies, and multi-nucleus electron allocation.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_RuntimeError);

  py::class_<RadialGrid>(m, "RadialGrid")
      .def_readonly("n", &RadialGrid::n)
      .def_readonly("r_min", &RadialGrid::r_min)
      .def_readonly("r_max", &RadialGrid::r_max)
      .def_readonly("du", &RadialGrid::du)
      .def_readonly("r", &RadialGrid::r)
      .def_readonly("wv", &RadialGrid::wv)
      .def_readonly("wa", &RadialGrid::wa);
  m.def("make_log_grid", &make_log_grid, py::arg("r_min"), py::arg("r_max"),
        py::arg("n"), "Logarithmic radial quadrature grid.");
  m.def("integrate_volume", &integrate_volume, py::arg("grid"),
        py::arg("values"));

  py::class_<Model>(m, "Model")
      .def_readonly("b", &Model::b)
      .def_readonly("Z", &Model::Z)
      .def_readonly("beta", &Model::beta)
      .def_readonly("c_kin", &Model::c_kin)
      .def_readonly("c_corr", &Model::c_corr)
      .def_property_readonly("family",
                             [](const Model& mo) { return family_name(mo); });
  m.def("make_model", &make_model, py::arg("family"), py::arg("b") = 1.0,
        py::arg("Z") = 1.0, py::arg("beta") = 5.0 / 3.0,
        "Families: tf_c0, tf_d, vw_c0, vw_d.");

  m.def("kinetic_energy", &kinetic_energy);
  m.def("correlation_energy", &correlation_energy);
  m.def("attraction_energy", &attraction_energy);
  m.def("coulomb_raw", &coulomb_raw);
  m.def("hartree_bruteforce", &hartree_bruteforce,
        "O(n^2) Hartree self-energy oracle; refuses grids beyond 4096 nodes.");
  m.def("total_energy", &total_energy);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("energy", &SolveResult::energy)
      .def_readonly("rho", &SolveResult::rho)
      .def_readonly("theta", &SolveResult::theta)
      .def_readonly("t_achieved", &SolveResult::t_achieved)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("support_radius", &SolveResult::support_radius)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("saturated", &SolveResult::saturated);
  m.def(
      "solve_constrained",
      [](const Model& mo, const RadialGrid& g, double t) {
        return solve_constrained(mo, g, t);
      },
      py::arg("model"), py::arg("grid"), py::arg("t"),
      "Minimize at mass <= t; L(t) is the energy at b = Z = 1.");
  m.def(
      "solve_unconstrained",
      [](const Model& mo, const RadialGrid& g) {
        return solve_unconstrained(mo, g);
      },
      py::arg("model"), py::arg("grid"));

  py::class_<GbEvaluator>(m, "GbEvaluator")
      .def("value", &GbEvaluator::value, py::arg("alpha"))
      .def("derivative", &GbEvaluator::derivative, py::arg("alpha"))
      .def("saturation_alpha", &GbEvaluator::saturation_alpha)
      .def("alpha_max_covered", &GbEvaluator::alpha_max_covered)
      .def("energy_scale", &GbEvaluator::energy_scale)
      .def("mass_scale", &GbEvaluator::mass_scale);
  m.def(
      "gb_evaluator",
      [](const std::string& cache_dir, const std::string& family, double b,
         double Z, double beta, double r_min, double r_max, int nodes) {
        return make_gb_evaluator(resolve_cache_dir(cache_dir), family, b, Z,
                                 beta, r_min, r_max, nodes);
      },
      py::arg("cache_dir") = std::string(), py::arg("family") = "tf_c0",
      py::arg("b") = 1.0, py::arg("Z") = 1.0, py::arg("beta") = 5.0 / 3.0,
      py::arg("r_min") = 1e-6, py::arg("r_max") = 50.0,
      py::arg("nodes") = 2048,
      "Limit cell energy g_b(Z, alpha) backed by a cached normalized table.");
  m.def("ionization_threshold", &ionization_threshold, py::arg("evaluator"),
        "Largest bound electron mass; inf for local-power families.");

  m.def(
      "allocate",
      [](const std::string& family, const std::vector<double>& Z, double mass,
         double b, double beta, const std::string& cache_dir, double r_min,
         double r_max, int nodes) {
        NucleiConfig cfg;
        cfg.family = family;
        cfg.b = b;
        cfg.beta = beta;
        cfg.Z = Z;
        cfg.m = mass;
        validate_config(cfg);
        auto li = build_l_interp(resolve_cache_dir(cache_dir), family, beta,
                                 r_min, r_max, nodes);
        std::vector<GbEvaluator> evs;
        evs.reserve(Z.size());
        for (double z : Z) evs.emplace_back(family, b, z, beta, li);
        const AllocationResult res = allocate(cfg, evs);
        py::dict d;
        d["alpha"] = res.alpha;
        d["lambda"] = res.lambda;
        d["total_mass"] = res.total_mass;
        d["energy"] = res.energy;
        d["ionized"] = res.ionized;
        d["leftover"] = res.leftover;
        d["kkt"] = kkt_to_dict(res.kkt);
        return d;
      },
      py::arg("family"), py::arg("Z"), py::arg("m"), py::arg("b") = 1.0,
      py::arg("beta") = 5.0 / 3.0, py::arg("cache_dir") = std::string(),
      py::arg("r_min") = 1e-6, py::arg("r_max") = 50.0,
      py::arg("nodes") = 2048,
      "Minimize sum_k g_b(Z_k, alpha_k) over alpha >= 0, sum alpha <= m.");
  m.def("closed_form_tfc0", &closed_form_tfc0, py::arg("Z"), py::arg("m"),
        "Exact proportional allocation m Z_k^3 / sum_j Z_j^3 for tf_c0.");
}
