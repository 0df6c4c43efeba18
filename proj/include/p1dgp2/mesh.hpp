#pragma once

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace p1dgp2 {

using Edge = std::array<int, 2>;
using Point = std::array<double, 3>;

// Local edges of a simplex in the order used for P2 edge nodes and VTK
// quadratic cells: (0,1),(1,2),(2,0) on triangles, plus (0,3),(1,3),(2,3) on tets.
std::span<const Edge> local_edges(int dim);

// Plain description of a simplicial mesh, used to construct a Mesh.
struct MeshData {
    int dim = 0;
    std::vector<double> coords;            // n_vertices * dim
    std::vector<int> cells;                // n_cells * (dim + 1)
    std::vector<int> facets;               // n_facets * dim; empty => derived
    std::vector<int> facet_markers;        // one per facet
    std::optional<double> period;          // 1D only: end vertices identified
};

// Immutable simplicial mesh in 1, 2 or 3 dimensions.
//
// Construction orients every cell positively (swapping its first two
// vertices when needed), rejects degenerate cells, derives the edge table and
// recovers the boundary facets. When no facets are supplied, every facet
// incident to exactly one cell becomes a boundary facet with marker 1.
//
// Periodic 1D meshes identify the two end vertices: vertex i sits at
// x_i in [0, period) and the last cell wraps from x_{n-1} back to x_0 + period.
class Mesh {
public:
    explicit Mesh(MeshData data);

    int dim() const noexcept { return dim_; }
    int vertices_per_cell() const noexcept { return dim_ + 1; }
    int n_vertices() const noexcept { return static_cast<int>(coords_.size()) / dim_; }
    int n_cells() const noexcept { return static_cast<int>(cells_.size()) / (dim_ + 1); }
    int n_edges() const noexcept { return static_cast<int>(edges_.size()); }
    int n_facets() const noexcept { return static_cast<int>(facet_markers_.size()); }

    std::span<const double> vertex(int v) const;
    std::span<const int> cell(int c) const;
    std::span<const double> coords() const noexcept { return coords_; }
    std::span<const int> cells() const noexcept { return cells_; }

    // Canonical edge table: sorted vertex pairs, sorted lexicographically.
    // In 1D every cell contributes its own edge (the cell interior).
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    // Global edge indices of the local edges of cell c, in local_edges() order.
    std::span<const int> cell_edges(int c) const;

    std::span<const int> facet(int f) const;
    int facet_marker(int f) const { return facet_markers_.at(static_cast<std::size_t>(f)); }
    int facet_cell(int f) const { return facet_cells_.at(static_cast<std::size_t>(f)); }
    // Local index of the cell vertex opposite to facet f.
    int facet_opposite(int f) const { return facet_opposite_.at(static_cast<std::size_t>(f)); }
    std::set<int> markers() const;

    const std::optional<double>& period() const noexcept { return period_; }
    bool periodic() const noexcept { return period_.has_value(); }

    // Vertex coordinates of cell c (unused components zero), unwrapped
    // across the periodic seam.
    std::array<Point, 4> cell_points(int c) const;
    double cell_measure(int c) const;
    double total_measure() const;

private:
    int dim_;
    std::vector<double> coords_;
    std::vector<int> cells_;
    std::vector<Edge> edges_;
    std::vector<int> cell_edges_;
    std::vector<int> facets_;
    std::vector<int> facet_markers_;
    std::vector<int> facet_cells_;
    std::vector<int> facet_opposite_;
    std::optional<double> period_;
};

// Signed measure of the simplex spanned by dim+1 points.
double signed_measure(int dim, std::span<const Point> points);

// Deterministic, duplicate-free edge table of a cell list (stride dim+1).
std::vector<Edge> extract_edges(int dim, std::span<const int> cells);
std::vector<Edge> extract_edges(const Mesh& mesh);

// n equal cells on [0, length]; end vertices carry markers 1 (x=0) and 2 (x=length).
// A periodic interval has n vertices and no boundary facets (requires n >= 2).
Mesh generate_interval_mesh(int n_elements, double length, bool periodic = false);
// Unit square, n x n quads each cut along the (i,j)-(i+1,j+1) diagonal.
Mesh generate_square_mesh(int n);
// Unit cube, n^3 subcubes each cut into the 6 tetrahedra sharing the main diagonal.
Mesh generate_cube_mesh(int n);

using ScalarField = std::function<double(const Point&)>;

// Boundary-condition selection by facet marker.
struct BcSpec {
    std::set<int> dirichlet_markers;
    std::set<int> neumann_markers;
    ScalarField g;   // Dirichlet datum for h; empty => 0
    ScalarField f;   // Neumann datum dh/dn; empty => 0

    static BcSpec all_dirichlet(const Mesh& mesh);
    static BcSpec all_neumann(const Mesh& mesh);

    bool is_dirichlet(int marker) const { return dirichlet_markers.count(marker) != 0; }
    // Throws ConfigError unless the marker sets are disjoint, name only
    // markers present on the mesh, and together cover every mesh marker.
    void validate(const Mesh& mesh) const;
};

} // namespace p1dgp2
