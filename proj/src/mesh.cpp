#include "p1dgp2/mesh.hpp"

#include "p1dgp2/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

namespace p1dgp2 {

namespace {

constexpr std::array<Edge, 1> kEdges1{{{0, 1}}};
constexpr std::array<Edge, 3> kEdges2{{{0, 1}, {1, 2}, {2, 0}}};
constexpr std::array<Edge, 6> kEdges3{{{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3}}};

// Sorted facet key; at most 3 vertices.
using FacetKey = std::array<int, 3>;

FacetKey facet_key(std::span<const int> verts)
{
    FacetKey key{-1, -1, -1};
    std::copy(verts.begin(), verts.end(), key.begin());
    std::sort(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(verts.size()));
    return key;
}

// Vertices of the facet of `cell` opposite to local vertex `opposite`.
std::vector<int> facet_of(std::span<const int> cell, int opposite)
{
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(cell.size()); ++i) {
        if (i != opposite) {
            out.push_back(cell[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

double max_edge_length(int dim, std::span<const Point> pts)
{
    double h = 0.0;
    for (int a = 0; a <= dim; ++a) {
        for (int b = a + 1; b <= dim; ++b) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double d = pts[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)]
                    - pts[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
                s += d * d;
            }
            h = std::max(h, std::sqrt(s));
        }
    }
    return h;
}

} // namespace

std::span<const Edge> local_edges(int dim)
{
    switch (dim) {
    case 1: return kEdges1;
    case 2: return kEdges2;
    case 3: return kEdges3;
    default: throw ContractError("local_edges: dimension must be 1, 2 or 3");
    }
}

double signed_measure(int dim, std::span<const Point> p)
{
    switch (dim) {
    case 1: return p[1][0] - p[0][0];
    case 2: {
        const double ax = p[1][0] - p[0][0], ay = p[1][1] - p[0][1];
        const double bx = p[2][0] - p[0][0], by = p[2][1] - p[0][1];
        return 0.5 * (ax * by - ay * bx);
    }
    case 3: {
        double m[3][3];
        for (int j = 0; j < 3; ++j) {
            for (int i = 0; i < 3; ++i) {
                m[i][j] = p[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(i)]
                    - p[0][static_cast<std::size_t>(i)];
            }
        }
        const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        return det / 6.0;
    }
    default: throw ContractError("signed_measure: dimension must be 1, 2 or 3");
    }
}

std::vector<Edge> extract_edges(int dim, std::span<const int> cells)
{
    const auto nv = static_cast<std::size_t>(dim + 1);
    std::vector<Edge> edges;
    edges.reserve(cells.size() / nv * local_edges(dim).size());
    for (std::size_t c = 0; c + nv <= cells.size(); c += nv) {
        for (const auto& [a, b] : local_edges(dim)) {
            const int va = cells[c + static_cast<std::size_t>(a)];
            const int vb = cells[c + static_cast<std::size_t>(b)];
            edges.push_back({std::min(va, vb), std::max(va, vb)});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

std::vector<Edge> extract_edges(const Mesh& mesh) { return mesh.edges(); }

Mesh::Mesh(MeshData data)
    : dim_(data.dim), coords_(std::move(data.coords)), cells_(std::move(data.cells)),
      period_(data.period)
{
    if (dim_ < 1 || dim_ > 3) {
        throw ContractError("Mesh: dimension must be 1, 2 or 3, got " + std::to_string(dim_));
    }
    if (period_ && dim_ != 1) {
        throw ContractError("Mesh: periodic identification is only supported in 1D");
    }
    const auto nv = static_cast<std::size_t>(dim_ + 1);
    if (coords_.size() % static_cast<std::size_t>(dim_) != 0 || cells_.size() % nv != 0) {
        throw ContractError("Mesh: coordinate or cell array length is not a multiple of the stride");
    }
    if (cells_.empty()) {
        throw ContractError("Mesh: no cells");
    }
    const int n_vert = n_vertices();
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i] < 0 || cells_[i] >= n_vert) {
            throw ContractError("Mesh: cell " + std::to_string(i / nv) + " references vertex "
                                + std::to_string(cells_[i]) + " outside [0, "
                                + std::to_string(n_vert) + ")");
        }
    }

    // Orientation and degeneracy.
    for (int c = 0; c < n_cells(); ++c) {
        auto pts = cell_points(c);
        const std::span<const Point> ps(pts.data(), nv);
        double m = signed_measure(dim_, ps);
        const double h = max_edge_length(dim_, ps);
        if (!(std::abs(m) > 1e-13 * std::pow(h, dim_))) {
            throw ContractError("Mesh: cell " + std::to_string(c) + " is degenerate (measure "
                                + std::to_string(m) + ")");
        }
        if (m < 0.0) {
            if (period_) {
                throw ContractError("Mesh: periodic cell " + std::to_string(c) + " has negative length");
            }
            std::swap(cells_[static_cast<std::size_t>(c) * nv], cells_[static_cast<std::size_t>(c) * nv + 1]);
        }
    }

    // Edges. In 1D the cell itself is the edge carrying the interior P2 node.
    if (dim_ == 1) {
        edges_.reserve(static_cast<std::size_t>(n_cells()));
        for (int c = 0; c < n_cells(); ++c) {
            const int a = cells_[2 * static_cast<std::size_t>(c)];
            const int b = cells_[2 * static_cast<std::size_t>(c) + 1];
            edges_.push_back({std::min(a, b), std::max(a, b)});
            cell_edges_.push_back(c);
        }
    } else {
        edges_ = extract_edges(dim_, cells_);
        std::map<Edge, int> index;
        for (int e = 0; e < n_edges(); ++e) {
            index.emplace(edges_[static_cast<std::size_t>(e)], e);
        }
        for (int c = 0; c < n_cells(); ++c) {
            const auto cv = cell(c);
            for (const auto& [a, b] : local_edges(dim_)) {
                const int va = cv[static_cast<std::size_t>(a)], vb = cv[static_cast<std::size_t>(b)];
                cell_edges_.push_back(index.at({std::min(va, vb), std::max(va, vb)}));
            }
        }
    }

    // Facet incidence.
    std::map<FacetKey, std::vector<std::pair<int, int>>> incidence;
    for (int c = 0; c < n_cells(); ++c) {
        const auto cv = cell(c);
        for (int k = 0; k <= dim_; ++k) {
            incidence[facet_key(facet_of(cv, k))].emplace_back(c, k);
        }
    }

    const auto nf = static_cast<std::size_t>(dim_);
    if (data.facets.empty()) {
        if (!period_) {
            for (const auto& [key, owners] : incidence) {
                if (owners.size() == 1) {
                    facets_.insert(facets_.end(), key.begin(), key.begin() + static_cast<std::ptrdiff_t>(nf));
                    facet_markers_.push_back(1);
                    facet_cells_.push_back(owners.front().first);
                    facet_opposite_.push_back(owners.front().second);
                }
            }
        }
    } else {
        if (data.facets.size() % nf != 0 || data.facets.size() / nf != data.facet_markers.size()) {
            throw ContractError("Mesh: facet array and marker array sizes disagree");
        }
        facets_ = std::move(data.facets);
        facet_markers_ = std::move(data.facet_markers);
        for (std::size_t f = 0; f < facet_markers_.size(); ++f) {
            const std::span<const int> fv(facets_.data() + f * nf, nf);
            const auto it = incidence.find(facet_key(fv));
            if (it == incidence.end() || it->second.size() != 1) {
                throw ContractError("Mesh: boundary facet " + std::to_string(f)
                                    + " is not a face of exactly one cell");
            }
            facet_cells_.push_back(it->second.front().first);
            facet_opposite_.push_back(it->second.front().second);
        }
    }
}

std::span<const double> Mesh::vertex(int v) const
{
    return {coords_.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
}

std::span<const int> Mesh::cell(int c) const
{
    const auto nv = static_cast<std::size_t>(dim_ + 1);
    return {cells_.data() + static_cast<std::size_t>(c) * nv, nv};
}

std::span<const int> Mesh::cell_edges(int c) const
{
    const std::size_t ne = local_edges(dim_).size();
    return {cell_edges_.data() + static_cast<std::size_t>(c) * ne, ne};
}

std::span<const int> Mesh::facet(int f) const
{
    const auto nf = static_cast<std::size_t>(dim_);
    return {facets_.data() + static_cast<std::size_t>(f) * nf, nf};
}

std::set<int> Mesh::markers() const { return {facet_markers_.begin(), facet_markers_.end()}; }

std::array<Point, 4> Mesh::cell_points(int c) const
{
    std::array<Point, 4> pts{};
    const auto cv = cell(c);
    for (int k = 0; k <= dim_; ++k) {
        const auto x = vertex(cv[static_cast<std::size_t>(k)]);
        for (int i = 0; i < dim_; ++i) {
            pts[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
        }
    }
    if (period_ && pts[1][0] <= pts[0][0]) {
        pts[1][0] += *period_;
    }
    return pts;
}

double Mesh::cell_measure(int c) const
{
    const auto pts = cell_points(c);
    return signed_measure(dim_, std::span<const Point>(pts.data(), static_cast<std::size_t>(dim_ + 1)));
}

double Mesh::total_measure() const
{
    double sum = 0.0;
    for (int c = 0; c < n_cells(); ++c) {
        sum += cell_measure(c);
    }
    return sum;
}

Mesh generate_interval_mesh(int n_elements, double length, bool periodic)
{
    if (n_elements < 1) {
        throw ContractError("generate_interval_mesh: n_elements must be >= 1");
    }
    if (!(length > 0.0)) {
        throw ContractError("generate_interval_mesh: length must be positive");
    }
    if (periodic && n_elements < 2) {
        throw ContractError("generate_interval_mesh: a periodic interval needs at least 2 elements");
    }
    MeshData d;
    d.dim = 1;
    const int nv = periodic ? n_elements : n_elements + 1;
    const double dx = length / n_elements;
    for (int i = 0; i < nv; ++i) {
        d.coords.push_back(i == n_elements ? length : i * dx);
    }
    for (int i = 0; i < n_elements; ++i) {
        d.cells.push_back(i);
        d.cells.push_back(periodic ? (i + 1) % n_elements : i + 1);
    }
    if (periodic) {
        d.period = length;
    } else {
        d.facets = {0, n_elements};
        d.facet_markers = {1, 2};
    }
    return Mesh(std::move(d));
}

Mesh generate_square_mesh(int n)
{
    if (n < 1) {
        throw ContractError("generate_square_mesh: n must be >= 1");
    }
    MeshData d;
    d.dim = 2;
    const auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            d.coords.push_back(static_cast<double>(i) / n);
            d.coords.push_back(static_cast<double>(j) / n);
        }
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            d.cells.insert(d.cells.end(), {id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            d.cells.insert(d.cells.end(), {id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return Mesh(std::move(d));
}

Mesh generate_cube_mesh(int n)
{
    if (n < 1) {
        throw ContractError("generate_cube_mesh: n must be >= 1");
    }
    MeshData d;
    d.dim = 3;
    const auto id = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                d.coords.insert(d.coords.end(), {static_cast<double>(i) / n, static_cast<double>(j) / n,
                                                 static_cast<double>(k) / n});
            }
        }
    }
    // Kuhn decomposition: one tetrahedron per ordering of the axis steps.
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                for (const auto& p : perms) {
                    std::array<int, 3> at{i, j, k};
                    d.cells.push_back(id(at[0], at[1], at[2]));
                    for (int s = 0; s < 3; ++s) {
                        ++at[static_cast<std::size_t>(p[static_cast<std::size_t>(s)])];
                        d.cells.push_back(id(at[0], at[1], at[2]));
                    }
                }
            }
        }
    }
    return Mesh(std::move(d));
}

BcSpec BcSpec::all_dirichlet(const Mesh& mesh)
{
    BcSpec bc;
    bc.dirichlet_markers = mesh.markers();
    return bc;
}

BcSpec BcSpec::all_neumann(const Mesh& mesh)
{
    BcSpec bc;
    bc.neumann_markers = mesh.markers();
    return bc;
}

void BcSpec::validate(const Mesh& mesh) const
{
    const auto present = mesh.markers();
    for (int m : dirichlet_markers) {
        if (neumann_markers.count(m) != 0) {
            throw ConfigError("boundary marker " + std::to_string(m) + " is both Dirichlet and Neumann");
        }
    }
    for (const auto* set : {&dirichlet_markers, &neumann_markers}) {
        for (int m : *set) {
            if (present.count(m) == 0) {
                throw ConfigError("boundary marker " + std::to_string(m) + " is not present on the mesh");
            }
        }
    }
    for (int m : present) {
        if (dirichlet_markers.count(m) == 0 && neumann_markers.count(m) == 0) {
            throw ConfigError("boundary marker " + std::to_string(m) + " has no boundary condition");
        }
    }
}

} // namespace p1dgp2
