#include "p1dgp2/vtk.hpp"

#include "p1dgp2/error.hpp"

#include <fstream>
#include <iomanip>

namespace p1dgp2 {

namespace {

std::ofstream open_vtk(const std::filesystem::path& path, const std::string& title)
{
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    return out;
}

void write_points(std::ostream& out, const std::vector<Point>& points)
{
    out << "POINTS " << points.size() << " double\n";
    for (const Point& p : points) {
        out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
    }
}

void check_state(const Mesh& mesh, const DofMap& dofs, const FieldState& s)
{
    if (static_cast<int>(s.u.size()) != mesh.dim() || s.h.size() != dofs.m_h()) {
        throw ContractError("field state does not match the mesh");
    }
    for (const auto& u : s.u) {
        if (u.size() != dofs.m_u()) {
            throw ContractError("field state does not match the mesh");
        }
    }
}

} // namespace

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const DofMap& dofs, const FieldState& state,
               const std::string& title)
{
    check_state(mesh, dofs, state);
    static constexpr int kQuadraticType[] = {0, 21, 22, 24};
    const int dim = mesh.dim();
    std::ofstream out = open_vtk(path, title);
    write_points(out, h_node_positions(mesh, dofs));

    const int per_cell = dofs.h_per_cell();
    out << "CELLS " << mesh.n_cells() << ' ' << mesh.n_cells() * (per_cell + 1) << '\n';
    for (int c = 0; c < mesh.n_cells(); ++c) {
        out << per_cell;
        for (int d : dofs.h_dofs(c)) {
            out << ' ' << d;
        }
        out << '\n';
    }
    out << "CELL_TYPES " << mesh.n_cells() << '\n';
    for (int c = 0; c < mesh.n_cells(); ++c) {
        out << kQuadraticType[dim] << '\n';
    }

    out << "CELL_DATA " << mesh.n_cells() << "\nVECTORS u_mean double\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto u = dofs.u_dofs(c);
        for (int i = 0; i < 3; ++i) {
            double mean = 0.0;
            if (i < dim) {
                for (int d : u) {
                    mean += state.u[static_cast<std::size_t>(i)](d);
                }
                mean /= static_cast<double>(u.size());
            }
            out << (i ? " " : "") << mean;
        }
        out << '\n';
    }
    out << "POINT_DATA " << dofs.m_h() << "\nSCALARS h double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < dofs.m_h(); ++i) {
        out << state.h(i) << '\n';
    }
}

void write_vtk_exploded(const std::filesystem::path& path, const Mesh& mesh, const DofMap& dofs,
                        const FieldState& state, const std::string& title)
{
    check_state(mesh, dofs, state);
    static constexpr int kLinearType[] = {0, 3, 5, 10};
    const int dim = mesh.dim();
    const int nv = dim + 1;
    std::ofstream out = open_vtk(path, title);
    write_points(out, u_node_positions(mesh, dofs));

    out << "CELLS " << mesh.n_cells() << ' ' << mesh.n_cells() * (nv + 1) << '\n';
    for (int c = 0; c < mesh.n_cells(); ++c) {
        out << nv;
        for (int d : dofs.u_dofs(c)) {
            out << ' ' << d;
        }
        out << '\n';
    }
    out << "CELL_TYPES " << mesh.n_cells() << '\n';
    for (int c = 0; c < mesh.n_cells(); ++c) {
        out << kLinearType[dim] << '\n';
    }

    out << "POINT_DATA " << dofs.m_u() << "\nSCALARS h double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto h = dofs.h_dofs(c);
        for (int k = 0; k < nv; ++k) {
            out << state.h(h[static_cast<std::size_t>(k)]) << '\n';
        }
    }
    out << "VECTORS u double\n";
    for (int i = 0; i < dofs.m_u(); ++i) {
        for (int k = 0; k < 3; ++k) {
            out << (k ? " " : "") << (k < dim ? state.u[static_cast<std::size_t>(k)](i) : 0.0);
        }
        out << '\n';
    }
}

} // namespace p1dgp2
