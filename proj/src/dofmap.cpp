#include "p1dgp2/dofmap.hpp"

#include "p1dgp2/error.hpp"

namespace p1dgp2 {

DofMap::DofMap(const Mesh& mesh)
    : dim_(mesh.dim()), n_cells_(mesh.n_cells()), m_h_(mesh.n_vertices() + mesh.n_edges())
{
    h_map_.reserve(static_cast<std::size_t>(n_cells_ * h_per_cell()));
    for (int c = 0; c < n_cells_; ++c) {
        const auto verts = mesh.cell(c);
        h_map_.insert(h_map_.end(), verts.begin(), verts.end());
        for (int e : mesh.cell_edges(c)) {
            h_map_.push_back(mesh.n_vertices() + e);
        }
    }
}

std::vector<int> DofMap::u_dofs(int cell) const
{
    if (cell < 0 || cell >= n_cells_) {
        throw ContractError("DofMap::u_dofs: cell out of range");
    }
    std::vector<int> out(static_cast<std::size_t>(u_per_cell()));
    for (int k = 0; k < u_per_cell(); ++k) {
        out[static_cast<std::size_t>(k)] = cell * u_per_cell() + k;
    }
    return out;
}

std::span<const int> DofMap::h_dofs(int cell) const
{
    const auto n = static_cast<std::size_t>(h_per_cell());
    return {h_map_.data() + static_cast<std::size_t>(cell) * n, n};
}

DofCounts count_dofs(int dim, long cells, long vertices, long edges)
{
    if (dim < 1 || dim > 3) {
        throw ContractError("count_dofs: dimension must be 1, 2 or 3");
    }
    DofCounts d;
    d.cells = cells;
    d.vertices = vertices;
    d.edges = edges;
    d.u_per_component = (dim + 1) * cells;
    d.h = vertices + edges;
    return d;
}

DofCounts count_dofs(const Mesh& mesh)
{
    return count_dofs(mesh.dim(), mesh.n_cells(), mesh.n_vertices(), mesh.n_edges());
}

} // namespace p1dgp2
