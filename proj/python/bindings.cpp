#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "chac/commands.hpp"
#include "chac/config.hpp"
#include "chac/diagnostics.hpp"
#include "chac/errors.hpp"
#include "chac/fespace.hpp"
#include "chac/model.hpp"
#include "chac/scheme.hpp"
#include "chac/study.hpp"

namespace py = pybind11;
using namespace chac;

namespace {

struct SimulationResult {
    std::vector<DiagnosticsRow> rows;
    std::vector<double> rho;
    std::vector<double> eta;
};

class Collector : public RunObserver {
public:
    explicit Collector(std::vector<DiagnosticsRow>& rows) : rows_(rows) {}
    void on_start(const State&, const DiagnosticsRow& row) override { rows_.push_back(row); }
    void on_step(const StepRecord& r) override { rows_.push_back(r.row); }

private:
    std::vector<DiagnosticsRow>& rows_;
};

SimulationResult simulate(const RunConfig& cfg) {
    validate_config(cfg);
    SimulationResult out;
    py::gil_scoped_release release;
    const FeSpace space = build_space(build_periodic_mesh(std::size_t{1} << cfg.mesh_k), cfg.quad_degree);
    Collector c(out.rows);
    RunObserver* observers[] = {&c};
    const State final_state = run(space, cfg.model(), TimeGrid{cfg.T, cfg.n_steps()}, benchmark_initial_data(),
                                  observers, cfg.run_options());
    out.rho = final_state.rho.coeffs;
    out.eta = final_state.eta.coeffs;
    return out;
}

py::tuple check(const RunConfig& cfg) {
    std::ostringstream out;
    std::ostringstream err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = cmd_check(cfg, out, err);
    }
    return py::make_tuple(code, out.str() + err.str());
}

std::vector<ConvergenceRow> converge(const RunConfig& cfg, int k_min, int k_max, int jobs) {
    validate_config(cfg);
    LadderConfig lc;
    lc.params = cfg.model();
    lc.tau_factor = cfg.tau_factor;
    lc.T = cfg.T;
    lc.run = cfg.run_options();
    lc.quad_degree = cfg.quad_degree;
    lc.jobs = jobs;
    py::gil_scoped_release release;
    return run_ladder(lc, k_min, k_max).rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Coupled Cahn-Hilliard / Allen-Cahn P2 finite-element solver";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
    py::register_exception<LineageMismatch>(m, "LineageMismatch", PyExc_ValueError);
    py::register_exception<StepFailure>(m, "StepFailure", PyExc_RuntimeError);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("mesh_k", &RunConfig::mesh_k)
        .def_readwrite("tau_factor", &RunConfig::tau_factor)
        .def_readwrite("T", &RunConfig::T)
        .def_readwrite("gamma_rho", &RunConfig::gamma_rho)
        .def_readwrite("gamma_eta", &RunConfig::gamma_eta)
        .def_readwrite("C", &RunConfig::C)
        .def_readwrite("D", &RunConfig::D)
        .def_readwrite("alpha", &RunConfig::alpha)
        .def_readwrite("l22", &RunConfig::l22)
        .def_readwrite("l12_scale", &RunConfig::l12_scale)
        .def_readwrite("normal_c", &RunConfig::normal_c)
        .def_readwrite("newton_tol", &RunConfig::newton_tol)
        .def_readwrite("newton_abs_floor", &RunConfig::newton_abs_floor)
        .def_readwrite("newton_max_iter", &RunConfig::newton_max_iter)
        .def_readwrite("quad_degree", &RunConfig::quad_degree)
        .def_readwrite("time_quad_points", &RunConfig::time_quad_points)
        .def_readwrite("snapshot_every", &RunConfig::snapshot_every)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def_readwrite("seed", &RunConfig::seed)
        .def_property_readonly("h", &RunConfig::h)
        .def_property_readonly("tau", &RunConfig::tau)
        .def_property_readonly("n_steps", &RunConfig::n_steps)
        .def("set", [](RunConfig& c, const std::string& assignment) { apply_override(c, assignment); })
        .def("validate", [](const RunConfig& c) { validate_config(c); })
        .def("__str__", [](const RunConfig& c) { return format_config(c); });

    m.def("config_keys", &config_keys);
    m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
    m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));

    py::class_<PotentialValue>(m, "PotentialValue")
        .def_readonly("f", &PotentialValue::f)
        .def_readonly("f_rho", &PotentialValue::f_rho)
        .def_readonly("f_eta", &PotentialValue::f_eta)
        .def_readonly("f_rho_rho", &PotentialValue::f_rho_rho)
        .def_readonly("f_rho_eta", &PotentialValue::f_rho_eta)
        .def_readonly("f_eta_eta", &PotentialValue::f_eta_eta);
    m.def(
        "potential",
        [](double rho, double eta, double C, double D) { return potential_eval(PotentialSpec{C, D, 2.0}, rho, eta); },
        py::arg("rho"), py::arg("eta"), py::arg("C") = 1.0, py::arg("D") = 0.062);
    m.def(
        "mobility",
        [](const Omega& omega, double l22, double l12_scale, double c) {
            return mobility_eval(MobilitySpec{l22, l12_scale, c}, omega).L;
        },
        py::arg("omega"), py::arg("l22") = 1000.0, py::arg("l12_scale") = std::sqrt(1000.0), py::arg("c") = 1.0,
        "3x3 mobility matrix at omega = (rho, eta, d_x rho, d_y rho, d_x eta, d_y eta).");

    py::class_<FeSpace>(m, "Space")
        .def(py::init([](int k) { return build_space(build_periodic_mesh(std::size_t{1} << k)); }), py::arg("k"))
        .def_property_readonly("n_dofs", &FeSpace::n_dofs)
        .def_property_readonly("n_elements", &FeSpace::n_elements)
        .def_property_readonly("h", [](const FeSpace& s) { return s.mesh().h(); })
        .def("mass", [](const FeSpace& s, std::vector<double> v) { return mass(s, s.wrap(std::move(v))); })
        .def("norm",
             [](const FeSpace& s, std::vector<double> v, const std::string& kind) {
                 const NormKind k = kind == "L2" ? NormKind::L2 : kind == "H1" ? NormKind::H1 : NormKind::H1semi;
                 if (kind != "L2" && kind != "H1" && kind != "H1semi") throw InvalidParameter("unknown norm " + kind);
                 return norm(s, s.wrap(std::move(v)), k);
             },
             py::arg("coeffs"), py::arg("kind") = "L2")
        .def("initial_state", [](const FeSpace& s) {
            const State st = project_initial(s, benchmark_initial_data());
            return py::make_tuple(st.rho.coeffs, st.eta.coeffs);
        });

    py::class_<DiagnosticsRow>(m, "DiagnosticsRow")
        .def_readonly("step", &DiagnosticsRow::step)
        .def_readonly("t", &DiagnosticsRow::t)
        .def_readonly("mass_rho", &DiagnosticsRow::mass_rho)
        .def_readonly("energy", &DiagnosticsRow::energy)
        .def_readonly("dissipation_interval", &DiagnosticsRow::dissipation_interval)
        .def_readonly("energy_identity_residual", &DiagnosticsRow::energy_identity_residual)
        .def_readonly("newton_iters", &DiagnosticsRow::newton_iters)
        .def_readonly("newton_residual", &DiagnosticsRow::newton_residual);

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("rows", &SimulationResult::rows)
        .def_readonly("rho", &SimulationResult::rho)
        .def_readonly("eta", &SimulationResult::eta);
    m.def("simulate", &simulate, py::arg("config"), "Runs the benchmark problem and returns per-step diagnostics.");
    m.def("check", &check, py::arg("config"), "Short invariant self-check; returns (exit_code, report).");

    py::class_<ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("k", &ConvergenceRow::k)
        .def_readonly("h", &ConvergenceRow::h)
        .def_readonly("tau", &ConvergenceRow::tau)
        .def_readonly("err", &ConvergenceRow::err)
        .def_readonly("eoc", &ConvergenceRow::eoc);
    m.def("converge", &converge, py::arg("config"), py::arg("k_min") = 1, py::arg("k_max") = 4, py::arg("jobs") = 1);
    m.def("eoc", &eoc, py::arg("err_coarse"), py::arg("err_fine"));
}
