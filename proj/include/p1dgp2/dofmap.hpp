#pragma once

#include "p1dgp2/mesh.hpp"

#include <span>
#include <vector>

namespace p1dgp2 {

// Global numbering for the discontinuous P1 velocity space (per component)
// and the continuous P2 scalar space.
//
// Velocity DOFs are numbered cell by cell, (dim+1) consecutive indices per
// cell. Scalar DOFs are the mesh vertices followed by the edges in the
// canonical edge order; the local order within a cell follows
// ReferenceElement(P2_CG).
class DofMap {
public:
    explicit DofMap(const Mesh& mesh);

    int dim() const noexcept { return dim_; }
    int n_cells() const noexcept { return n_cells_; }
    int u_per_cell() const noexcept { return dim_ + 1; }
    int h_per_cell() const noexcept { return (dim_ + 1) * (dim_ + 2) / 2; }
    int m_u() const noexcept { return n_cells_ * u_per_cell(); }
    int m_h() const noexcept { return m_h_; }

    std::vector<int> u_dofs(int cell) const;
    std::span<const int> h_dofs(int cell) const;

private:
    int dim_;
    int n_cells_;
    int m_h_;
    std::vector<int> h_map_;
};

inline DofMap build_dof_maps(const Mesh& mesh) { return DofMap(mesh); }

struct DofCounts {
    long cells = 0;
    long vertices = 0;
    long edges = 0;
    long u_per_component = 0;
    long h = 0;

    double ratio() const { return h > 0 ? static_cast<double>(u_per_component) / static_cast<double>(h) : 0.0; }
};

// u = (dim+1) * cells, h = vertices + edges.
DofCounts count_dofs(int dim, long cells, long vertices, long edges);
DofCounts count_dofs(const Mesh& mesh);

} // namespace p1dgp2
