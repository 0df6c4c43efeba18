#include "p1dgp2/dispersion1d.hpp"
#include "p1dgp2/dynamics.hpp"
#include "p1dgp2/error.hpp"
#include "p1dgp2/mesh_io.hpp"
#include "p1dgp2/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace p1dgp2;

namespace {

// Operators together with the mesh and DOF tables they were assembled on,
// so that simulations can interpolate initial data.
struct Problem {
    Mesh mesh;
    DofMap dofs;
    AssembledOperators ops;
    std::string bc;
};

BcSpec make_bc(const Mesh& mesh, const std::string& bc)
{
    if (bc == "dirichlet") {
        return BcSpec::all_dirichlet(mesh);
    }
    if (bc == "neumann") {
        return BcSpec::all_neumann(mesh);
    }
    throw ConfigError("bc must be 'dirichlet' or 'neumann'");
}

EigenMethod parse_method(const std::string& m)
{
    if (m == "auto") {
        return EigenMethod::Auto;
    }
    if (m == "dense") {
        return EigenMethod::Dense;
    }
    if (m == "iterative") {
        return EigenMethod::Iterative;
    }
    throw ConfigError("method must be 'auto', 'dense' or 'iterative'");
}

std::shared_ptr<Problem> make_problem(const Mesh& mesh, const std::string& bc)
{
    auto p = std::shared_ptr<Problem>(new Problem{mesh, DofMap(mesh), {}, bc});
    p->ops = assemble(p->mesh, p->dofs, make_bc(p->mesh, bc));
    return p;
}

py::dict consistency(int elements)
{
    const ConsistencyReport r = semidiscrete_consistency_check(elements);
    py::dict d;
    d["elements"] = r.elements;
    d["max_frequency_error"] = r.max_frequency_error;
    d["worst_m"] = r.worst_m;
    d["max_eigen_residual"] = r.max_eigen_residual;
    d["full_spectrum_error"] = r.full_spectrum_error;
    d["stencil_error"] = r.stencil_error;
    d["passed"] = r.passed();
    return d;
}

py::dict sweep(int samples)
{
    const DispersionSweep s = dispersion_sweep(samples);
    const auto n = static_cast<Eigen::Index>(s.samples.size());
    Eigen::VectorXd phi(n), lower(n), upper(n), dl(n), du(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& x = s.samples[static_cast<std::size_t>(i)];
        phi(i) = x.phi;
        lower(i) = x.w_lower;
        upper(i) = x.w_upper;
        dl(i) = x.disc_lower;
        du(i) = x.disc_upper;
    }
    py::dict d;
    d["phi"] = phi;
    d["w_lower"] = lower;
    d["w_upper"] = upper;
    d["disc_lower"] = dl;
    d["disc_upper"] = du;
    d["gap"] = s.gap();
    return d;
}

py::dict run(const Problem& p, double dt, double t_end, std::vector<double> center, double width,
             int stride, bool force_dt)
{
    if (center.empty()) {
        center.assign(static_cast<std::size_t>(p.mesh.dim()), 0.5);
    }
    if (static_cast<int>(center.size()) != p.mesh.dim()) {
        throw ConfigError("center must have one coordinate per dimension");
    }
    Point c{};
    std::copy(center.begin(), center.end(), c.begin());
    const FieldState initial = interpolate_initial_state(p.mesh, p.dofs, gaussian_bump(c, width));
    SimulationConfig cfg;
    cfg.dt = dt;
    cfg.n_steps = steps_for(t_end, dt);
    cfg.energy_stride = stride;
    cfg.force_dt = force_dt;
    SimulationResult r;
    {
        py::gil_scoped_release release;
        r = simulate(p.ops, initial, cfg);
    }
    const auto n = static_cast<Eigen::Index>(r.energy.size());
    Eigen::VectorXd time(n), energy(n), error(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& e = r.energy[static_cast<std::size_t>(i)];
        time(i) = e.time;
        energy(i) = e.energy;
        error(i) = e.energy_error;
    }
    py::dict d;
    d["time"] = time;
    d["energy"] = energy;
    d["energy_error"] = error;
    d["h"] = r.final_state.h;
    d["u"] = r.final_state.u;
    d["completed"] = r.completed;
    d["failure"] = r.failure;
    d["stable_dt"] = r.stable_dt;
    return d;
}

} // namespace

PYBIND11_MODULE(p1dgp2, m)
{
    m.doc() = "Mixed P1DG-P2 finite elements for the first-order wave equation";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("dim", &Mesh::dim)
        .def_property_readonly("n_cells", &Mesh::n_cells)
        .def_property_readonly("n_vertices", &Mesh::n_vertices)
        .def_property_readonly("n_edges", &Mesh::n_edges)
        .def_property_readonly("periodic", &Mesh::periodic)
        .def("total_measure", &Mesh::total_measure)
        .def("__repr__", [](const Mesh& mesh) {
            return "<Mesh dim=" + std::to_string(mesh.dim()) + " cells=" + std::to_string(mesh.n_cells()) + ">";
        });

    m.def("load_mesh", &load_mesh, py::arg("path"), "Read a Triangle (2D) or TetGen (3D) mesh");
    m.def("generate_interval", &generate_interval_mesh, py::arg("n"), py::arg("length") = 1.0,
          py::arg("periodic") = false);
    m.def("generate_square", &generate_square_mesh, py::arg("n"));
    m.def("generate_cube", &generate_cube_mesh, py::arg("n"));

    m.def(
        "dof_counts",
        [](const Mesh& mesh) {
            const DofCounts c = count_dofs(mesh);
            py::dict d;
            d["cells"] = c.cells;
            d["vertices"] = c.vertices;
            d["edges"] = c.edges;
            d["u_per_component"] = c.u_per_component;
            d["h"] = c.h;
            d["ratio"] = c.ratio();
            return d;
        },
        py::arg("mesh"));

    py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
        .def(py::init(&make_problem), py::arg("mesh"), py::arg("bc") = "neumann")
        .def_readonly("mesh", &Problem::mesh)
        .def_readonly("bc", &Problem::bc)
        .def_property_readonly("dim", [](const Problem& p) { return p.ops.dim; })
        .def_property_readonly("m_u", [](const Problem& p) { return p.ops.m_u; })
        .def_property_readonly("m_h", [](const Problem& p) { return p.ops.m_h; })
        .def_property_readonly("mass_h", [](const Problem& p) { return p.ops.mass_h; })
        .def_property_readonly("mass_u", [](const Problem& p) { return p.ops.mass_u.to_sparse(); })
        .def_property_readonly("gradient", [](const Problem& p) { return p.ops.gradient; })
        .def("laplacian", [](const Problem& p) { return laplacian_operator(p.ops); })
        .def(
            "spectrum",
            [](const Problem& p, int count, const std::string& method) {
                SpectrumOptions o;
                o.count = count;
                o.method = parse_method(method);
                py::gil_scoped_release release;
                return laplacian_spectrum(p.ops, o).eigenvalues;
            },
            py::arg("count") = 20, py::arg("method") = "auto")
        .def(
            "max_eigenvalue",
            [](const Problem& p, const std::string& method) { return max_eigenvalue(p.ops, parse_method(method)); },
            py::arg("method") = "auto")
        .def("stable_dt", [](const Problem& p, double c) { return stable_dt_estimate(p.ops, c); },
             py::arg("wave_speed") = 1.0)
        .def("simulate", &run, py::arg("dt"), py::arg("t_end"), py::arg("center") = std::vector<double>{},
             py::arg("width") = 0.1, py::arg("stride") = 1, py::arg("force_dt") = false,
             "Leapfrog run from a Gaussian height bump at rest; returns energy history and final fields");

    m.def(
        "dispersion",
        [](double phi) {
            const DispersionBranches b = dispersion_closed_form(phi);
            return std::make_pair(b.lower, b.upper);
        },
        py::arg("phi"), "Closed-form (lower, upper) frequencies at phase phi");
    m.def("dispersion_sweep", &sweep, py::arg("samples") = 200);
    m.def("consistency_check", &consistency, py::arg("elements"));
}
