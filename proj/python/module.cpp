#include "descent/experiment.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace descent;

PYBIND11_MODULE(_core, m) {
    m.doc() = "quasilinear elliptic solver toolkit: P1 FEM on the L-shape, "
              "Zarantonello/Kacanov/Newton fixed-point iterations and PNCG";

    // mesh
    py::class_<Mesh>(m, "Mesh")
        .def_readonly("vertices", &Mesh::vertices)
        .def_readonly("triangles", &Mesh::triangles)
        .def_readonly("level", &Mesh::level)
        .def_property_readonly("boundary_vertex",
                               [](const Mesh& mesh) {
                                   std::vector<bool> flags(mesh.boundary_vertex.begin(),
                                                           mesh.boundary_vertex.end());
                                   return flags;
                               })
        .def("num_vertices", &Mesh::num_vertices)
        .def("num_triangles", &Mesh::num_triangles)
        .def("total_area", &Mesh::total_area);
    m.def("build_lshape", &build_lshape, py::arg("level"));
    m.def("refine_uniform", &refine_uniform, py::arg("mesh"));
    m.def("interior_dof_count", [](const Mesh& mesh) { return interior_dof_map(mesh).count; });
    m.def("on_lshape_boundary", &on_lshape_boundary, py::arg("x"), py::arg("y"));

    // diffusion
    py::class_<CarreauParams>(m, "CarreauParams")
        .def(py::init([](double mu_inf, double mu_0, double lambda, double r) {
                 CarreauParams p{mu_inf, mu_0, lambda, r};
                 p.validate();
                 return p;
             }),
             py::arg("mu_inf") = 1.0, py::arg("mu_0") = 100.0, py::arg("lambda") = 2.0,
             py::arg("r") = 1.4)
        .def_readonly("mu_inf", &CarreauParams::mu_inf)
        .def_readonly("mu_0", &CarreauParams::mu_0)
        .def_readonly("lambda_", &CarreauParams::lambda)
        .def_readonly("r", &CarreauParams::r);
    py::class_<DiffusionModel>(m, "DiffusionModel")
        .def("mu", [](const DiffusionModel& d, double t) { return d.mu(t); })
        .def("mu_prime", [](const DiffusionModel& d, double t) { return d.mu_prime(t); })
        .def("psi", [](const DiffusionModel& d, double s) { return d.psi(s); })
        .def_readonly("m_mu", &DiffusionModel::m_mu)
        .def_readonly("M_mu", &DiffusionModel::M_mu)
        .def_readonly("name", &DiffusionModel::name);
    m.def("carreau", &carreau, py::arg("params"));
    m.def("constant_diffusion", &constant_diffusion, py::arg("c"));
    py::class_<MonotonicityReport>(m, "MonotonicityReport")
        .def_readonly("pass_", &MonotonicityReport::pass)
        .def_readonly("worst_lower", &MonotonicityReport::worst_lower)
        .def_readonly("worst_upper", &MonotonicityReport::worst_upper);
    m.def("check_monotonicity", &check_monotonicity, py::arg("model"), py::arg("samples"));

    // fem
    py::class_<FemSystem>(m, "FemSystem")
        .def(py::init([](const Mesh& mesh, const DiffusionModel& model) {
                 return FemSystem(mesh, model);
             }),
             py::arg("mesh"), py::arg("model"))
        .def("num_dofs", &FemSystem::num_dofs)
        .def_property_readonly("load", [](const FemSystem& s) { return s.load(); })
        .def("element_gradients",
             [](const FemSystem& s, const std::vector<double>& u) {
                 return s.element_gradients(u);
             })
        .def("residual",
             [](const FemSystem& s, const std::vector<double>& u) { return s.residual(u); })
        .def("energy", [](const FemSystem& s, const std::vector<double>& u) { return s.energy(u); })
        .def("x_norm", [](const FemSystem& s, const std::vector<double>& v) { return s.x_norm(v); });

    // solvers
    py::enum_<Method>(m, "Method")
        .value("zarantonello", Method::zarantonello)
        .value("kacanov", Method::kacanov)
        .value("newton", Method::newton);
    py::enum_<RunMode>(m, "RunMode")
        .value("fixed_point", RunMode::fixed_point)
        .value("pncg", RunMode::pncg);
    py::enum_<BetaRule>(m, "BetaRule")
        .value("fletcher_reeves", BetaRule::fletcher_reeves)
        .value("polak_ribiere_plus", BetaRule::polak_ribiere_plus);
    py::class_<LineSearchConfig>(m, "LineSearchConfig")
        .def(py::init<>())
        .def_readwrite("alpha_max", &LineSearchConfig::alpha_max)
        .def_readwrite("expansion", &LineSearchConfig::expansion)
        .def_readwrite("tol_alpha", &LineSearchConfig::tol_alpha)
        .def_readwrite("max_evals", &LineSearchConfig::max_evals);
    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("method", &SolverConfig::method)
        .def_readwrite("mode", &SolverConfig::mode)
        .def_readwrite("beta_rule", &SolverConfig::beta_rule)
        .def_readwrite("delta_z", &SolverConfig::delta_z)
        .def_readwrite("delta_n", &SolverConfig::delta_n)
        .def_readwrite("tol_x", &SolverConfig::tol_x)
        .def_readwrite("relative_tol", &SolverConfig::relative_tol)
        .def_readwrite("max_iter", &SolverConfig::max_iter)
        .def_readwrite("line_search", &SolverConfig::line_search);
    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("step", &IterationRecord::step)
        .def_readonly("error_x", &IterationRecord::error_x)
        .def_readonly("energy", &IterationRecord::energy)
        .def_readonly("alpha", &IterationRecord::alpha)
        .def_readonly("beta", &IterationRecord::beta);
    py::class_<IterationLog>(m, "IterationLog")
        .def_readonly("records", &IterationLog::records)
        .def_readonly("converged", &IterationLog::converged)
        .def_readonly("steps_to_tol", &IterationLog::steps_to_tol)
        .def_readonly("note", &IterationLog::note);
    m.def("fixed_point_step",
          [](Method method, const FemSystem& sys, const std::vector<double>& u,
             const SolverConfig& cfg) { return fixed_point_step(method, sys, u, cfg); },
          py::arg("method"), py::arg("sys"), py::arg("u"), py::arg("cfg") = SolverConfig{});
    m.def("fixed_point_run",
          [](Method method, const FemSystem& sys, const SolverConfig& cfg,
             const std::vector<double>& u_ref) { return fixed_point_run(method, sys, cfg, u_ref); },
          py::arg("method"), py::arg("sys"), py::arg("cfg"), py::arg("u_ref"));
    m.def("pncg_run",
          [](Method method, const FemSystem& sys, const SolverConfig& cfg,
             const std::vector<double>& u_ref) { return pncg_run(method, sys, cfg, u_ref); },
          py::arg("method"), py::arg("sys"), py::arg("cfg"), py::arg("u_ref"));

    // experiment
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_static("from_json_file", &ExperimentConfig::from_json_file, py::arg("path"))
        .def_static("from_json_text", &ExperimentConfig::from_json_text, py::arg("text"))
        .def_readwrite("case_label", &ExperimentConfig::case_label)
        .def_readwrite("mesh_level", &ExperimentConfig::mesh_level)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_readwrite("tol_x", &ExperimentConfig::tol_x)
        .def_readwrite("max_iter", &ExperimentConfig::max_iter)
        .def_readwrite("delta_z", &ExperimentConfig::delta_z)
        .def_readwrite("delta_n", &ExperimentConfig::delta_n)
        .def("build_system", &ExperimentConfig::build_system);
    m.def("compute_reference",
          [](const ExperimentConfig& cfg, const FemSystem& sys, bool use_cache) {
              return compute_reference(cfg, sys, use_cache);
          },
          py::arg("cfg"), py::arg("sys"), py::arg("use_cache") = true);
    py::class_<TableCell>(m, "TableCell")
        .def_readonly("config", &TableCell::config)
        .def_readonly("log", &TableCell::log)
        .def_readonly("status", &TableCell::status);
    py::class_<TableResult>(m, "TableResult")
        .def_readonly("cells", &TableResult::cells)
        .def_readonly("reference_norm_x", &TableResult::reference_norm_x);
    m.def("run_table", &run_table, py::arg("cfg"));
    m.def("format_table_text", &format_table_text, py::arg("result"));
    m.def("write_table_outputs", &write_table_outputs, py::arg("result"));
    py::class_<CheckItem>(m, "CheckItem")
        .def_readonly("name", &CheckItem::name)
        .def_readonly("pass_", &CheckItem::pass)
        .def_readonly("margin", &CheckItem::margin)
        .def_readonly("detail", &CheckItem::detail);
    py::class_<CheckReport>(m, "CheckReport")
        .def_readonly("items", &CheckReport::items)
        .def("all_pass", &CheckReport::all_pass);
    m.def("run_checks", [](const ExperimentConfig& cfg) { return run_checks(cfg); },
          py::arg("cfg"));
    py::class_<ProbeRow>(m, "ProbeRow")
        .def_readonly("level", &ProbeRow::level)
        .def_readonly("dofs", &ProbeRow::dofs)
        .def_readonly("error_vs_exact", &ProbeRow::error_vs_exact)
        .def_readonly("error_vs_interpolant", &ProbeRow::error_vs_interpolant);
    py::class_<ProbeReport>(m, "ProbeReport")
        .def_readonly("rows", &ProbeReport::rows)
        .def_readonly("ratios", &ProbeReport::ratios);
    m.def("fem_convergence_probe", &fem_convergence_probe, py::arg("cfg"), py::arg("levels"));
}
