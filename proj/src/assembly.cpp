#include "p1dgp2/assembly.hpp"

#include "p1dgp2/error.hpp"
#include "p1dgp2/reference.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

namespace p1dgp2 {

namespace {

// Highest polynomial degree of any assembled integrand (P2 x P2 mass terms).
constexpr int kQuadratureDegree = 4;

int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

struct CellGeometry {
    std::array<Point, 4> pts{};
    double det = 0.0;                 // dim! * |K|
    Eigen::MatrixXd jinv_t;           // dim x dim
    Eigen::MatrixXd grad_lambda;      // dim x (dim+1), physical gradients of barycentrics
};

CellGeometry cell_geometry(const Mesh& mesh, int c)
{
    const int dim = mesh.dim();
    CellGeometry g;
    g.pts = mesh.cell_points(c);
    Eigen::MatrixXd jac(dim, dim);
    for (int j = 0; j < dim; ++j) {
        for (int i = 0; i < dim; ++i) {
            jac(i, j) = g.pts[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(i)]
                - g.pts[0][static_cast<std::size_t>(i)];
        }
    }
    g.det = jac.determinant();
    g.jinv_t = jac.inverse().transpose();
    Eigen::MatrixXd dl = Eigen::MatrixXd::Zero(dim, dim + 1);
    for (int j = 0; j < dim; ++j) {
        dl(j, 0) = -1.0;
        dl(j, j + 1) = 1.0;
    }
    g.grad_lambda = g.jinv_t * dl;
    return g;
}

Point physical_point(const CellGeometry& g, int dim, const Eigen::RowVectorXd& bary)
{
    Point x{0.0, 0.0, 0.0};
    for (int k = 0; k <= dim; ++k) {
        for (int i = 0; i < dim; ++i) {
            x[static_cast<std::size_t>(i)] += bary(k) * g.pts[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        }
    }
    return x;
}

struct FacetFrame {
    Eigen::VectorXd normal;   // outward unit normal
    double measure = 0.0;
};

FacetFrame facet_frame(const CellGeometry& g, int dim, int opposite)
{
    const Eigen::VectorXd grad = g.grad_lambda.col(opposite);
    const double len = grad.norm();
    FacetFrame fr;
    fr.normal = -grad / len;
    fr.measure = dim * (g.det / factorial(dim)) * len;
    return fr;
}

// Reference data shared by every cell of a given dimension.
struct Tables {
    QuadratureRule volume;
    Tabulation p1, p2;
    QuadratureRule facet;
    double facet_ref_measure = 1.0;
    std::vector<Eigen::MatrixXd> facet_points;   // per local facet, cell barycentrics
    std::vector<Tabulation> p1_facet, p2_facet;

    explicit Tables(int dim)
        : volume(quadrature(dim, kQuadratureDegree)),
          p1(tabulate(ReferenceElement(dim, Family::P1_DG), volume.points)),
          p2(tabulate(ReferenceElement(dim, Family::P2_CG), volume.points)),
          facet(quadrature(dim - 1, kQuadratureDegree)),
          facet_ref_measure(1.0 / factorial(dim - 1))
    {
        const ReferenceElement e1(dim, Family::P1_DG), e2(dim, Family::P2_CG);
        for (int k = 0; k <= dim; ++k) {
            Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(facet.size(), dim + 1);
            int col = 0;
            for (int j = 0; j <= dim; ++j) {
                if (j != k) {
                    pts.col(j) = facet.points.col(col++);
                }
            }
            p1_facet.push_back(tabulate(e1, pts));
            p2_facet.push_back(tabulate(e2, pts));
            facet_points.push_back(std::move(pts));
        }
    }
};

const Tables& tables(int dim)
{
    static const Tables t1(1), t2(2), t3(3);
    switch (dim) {
    case 1: return t1;
    case 2: return t2;
    default: return t3;
    }
}

// Facet index for each (cell, local opposite vertex), -1 when interior.
std::vector<int> cell_facet_table(const Mesh& mesh)
{
    const int nv = mesh.dim() + 1;
    std::vector<int> table(static_cast<std::size_t>(mesh.n_cells() * nv), -1);
    for (int f = 0; f < mesh.n_facets(); ++f) {
        table[static_cast<std::size_t>(mesh.facet_cell(f) * nv + mesh.facet_opposite(f))] = f;
    }
    return table;
}

double eval_or_zero(const ScalarField& fn, const Point& x) { return fn ? fn(x) : 0.0; }

ElementMatrices volume_terms(const CellGeometry& geo, const Tables& t, int dim)
{
    const int n1 = dim + 1;
    const int n2 = static_cast<int>(t.p2.values.cols());
    ElementMatrices em;
    em.mass_u = Eigen::MatrixXd::Zero(n1, n1);
    em.mass_h = Eigen::MatrixXd::Zero(n2, n2);
    em.gradient.assign(static_cast<std::size_t>(dim), Eigen::MatrixXd::Zero(n1, n2));
    for (int q = 0; q < t.volume.size(); ++q) {
        const double w = t.volume.weights(q) * geo.det;
        const Eigen::RowVectorXd n = t.p1.values.row(q);
        const Eigen::RowVectorXd nb = t.p2.values.row(q);
        em.mass_u.noalias() += w * n.transpose() * n;
        em.mass_h.noalias() += w * nb.transpose() * nb;
        const Eigen::MatrixXd grad = geo.jinv_t * t.p2.gradients[static_cast<std::size_t>(q)];
        for (int i = 0; i < dim; ++i) {
            em.gradient[static_cast<std::size_t>(i)].noalias() += w * n.transpose() * grad.row(i);
        }
    }
    return em;
}

void check_inputs(const Mesh& mesh, const DofMap& dofs, const BcSpec& bc)
{
    if (dofs.dim() != mesh.dim() || dofs.n_cells() != mesh.n_cells()
        || dofs.m_h() != mesh.n_vertices() + mesh.n_edges()) {
        throw ContractError("assemble: DOF map does not belong to this mesh");
    }
    bc.validate(mesh);
}

} // namespace

BlockDiagonalMatrix::BlockDiagonalMatrix(int block_size, std::vector<Eigen::MatrixXd> blocks)
    : block_size_(block_size), blocks_(std::move(blocks))
{
    factors_.reserve(blocks_.size());
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
        if (blocks_[k].rows() != block_size_ || blocks_[k].cols() != block_size_) {
            throw ContractError("BlockDiagonalMatrix: block " + std::to_string(k) + " has the wrong size");
        }
        factors_.emplace_back(blocks_[k]);
        if (factors_.back().info() != Eigen::Success) {
            throw NumericalError("BlockDiagonalMatrix: block " + std::to_string(k)
                                 + " is not positive definite (inconsistent mesh geometry)");
        }
    }
}

Eigen::VectorXd BlockDiagonalMatrix::multiply(const Eigen::VectorXd& x) const
{
    if (x.size() != rows()) {
        throw ContractError("BlockDiagonalMatrix::multiply: size mismatch");
    }
    Eigen::VectorXd y(rows());
    for (int k = 0; k < n_blocks(); ++k) {
        y.segment(k * block_size_, block_size_).noalias()
            = blocks_[static_cast<std::size_t>(k)] * x.segment(k * block_size_, block_size_);
    }
    return y;
}

Eigen::VectorXd BlockDiagonalMatrix::solve(const Eigen::VectorXd& b) const
{
    if (b.size() != rows()) {
        throw ContractError("BlockDiagonalMatrix::solve: size mismatch");
    }
    Eigen::VectorXd x(rows());
    for (int k = 0; k < n_blocks(); ++k) {
        x.segment(k * block_size_, block_size_)
            = factors_[static_cast<std::size_t>(k)].solve(b.segment(k * block_size_, block_size_));
    }
    return x;
}

SparseMatrix BlockDiagonalMatrix::to_sparse() const
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_blocks() * block_size_ * block_size_));
    for (int k = 0; k < n_blocks(); ++k) {
        const int o = k * block_size_;
        for (int i = 0; i < block_size_; ++i) {
            for (int j = 0; j < block_size_; ++j) {
                trip.emplace_back(o + i, o + j, blocks_[static_cast<std::size_t>(k)](i, j));
            }
        }
    }
    SparseMatrix m(rows(), rows());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SparseMatrix BlockDiagonalMatrix::inverse_to_sparse() const
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_blocks() * block_size_ * block_size_));
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(block_size_, block_size_);
    for (int k = 0; k < n_blocks(); ++k) {
        const Eigen::MatrixXd inv = factors_[static_cast<std::size_t>(k)].solve(eye);
        const int o = k * block_size_;
        for (int i = 0; i < block_size_; ++i) {
            for (int j = 0; j < block_size_; ++j) {
                trip.emplace_back(o + i, o + j, inv(i, j));
            }
        }
    }
    SparseMatrix m(rows(), rows());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

ElementMatrices element_matrices(const Mesh& mesh, int cell)
{
    return volume_terms(cell_geometry(mesh, cell), tables(mesh.dim()), mesh.dim());
}

AssembledOperators assemble(const Mesh& mesh, const DofMap& dofs, const BcSpec& bc)
{
    check_inputs(mesh, dofs, bc);
    const int dim = mesh.dim();
    const Tables& t = tables(dim);
    const int n1 = dim + 1;
    const auto facet_of = cell_facet_table(mesh);

    AssembledOperators ops;
    ops.dim = dim;
    ops.m_u = dofs.m_u();
    ops.m_h = dofs.m_h();
    ops.g.assign(static_cast<std::size_t>(dim), Eigen::VectorXd::Zero(ops.m_u));
    ops.f = Eigen::VectorXd::Zero(ops.m_h);

    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(static_cast<std::size_t>(mesh.n_cells()));
    std::vector<Eigen::Triplet<double>> mh_trip;
    std::vector<std::vector<Eigen::Triplet<double>>> c_trip(static_cast<std::size_t>(dim));

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellGeometry geo = cell_geometry(mesh, c);
        ElementMatrices em = volume_terms(geo, t, dim);
        const auto hd = dofs.h_dofs(c);
        const int u0 = c * n1;

        for (int k = 0; k <= dim; ++k) {
            const int f = facet_of[static_cast<std::size_t>(c * n1 + k)];
            if (f < 0) {
                continue;
            }
            const FacetFrame fr = facet_frame(geo, dim, k);
            const bool dirichlet = bc.is_dirichlet(mesh.facet_marker(f));
            const auto& p1 = t.p1_facet[static_cast<std::size_t>(k)];
            const auto& p2 = t.p2_facet[static_cast<std::size_t>(k)];
            for (int q = 0; q < t.facet.size(); ++q) {
                const double w = t.facet.weights(q) * fr.measure / t.facet_ref_measure;
                const Point x = physical_point(geo, dim, t.facet_points[static_cast<std::size_t>(k)].row(q));
                const Eigen::RowVectorXd n = p1.values.row(q);
                const Eigen::RowVectorXd nb = p2.values.row(q);
                if (dirichlet) {
                    const double gval = eval_or_zero(bc.g, x);
                    for (int i = 0; i < dim; ++i) {
                        em.gradient[static_cast<std::size_t>(i)].noalias() -= (w * fr.normal(i)) * n.transpose() * nb;
                        ops.g[static_cast<std::size_t>(i)].segment(u0, n1) += (w * gval * fr.normal(i)) * n.transpose();
                    }
                } else {
                    const double fval = eval_or_zero(bc.f, x);
                    for (int b = 0; b < nb.size(); ++b) {
                        ops.f(hd[static_cast<std::size_t>(b)]) += w * fval * nb(b);
                    }
                }
            }
            ops.has_dirichlet = ops.has_dirichlet || dirichlet;
        }

        blocks.push_back(std::move(em.mass_u));
        for (int a = 0; a < em.mass_h.rows(); ++a) {
            for (int b = 0; b < em.mass_h.cols(); ++b) {
                mh_trip.emplace_back(hd[static_cast<std::size_t>(a)], hd[static_cast<std::size_t>(b)], em.mass_h(a, b));
            }
        }
        for (int i = 0; i < dim; ++i) {
            const auto& ci = em.gradient[static_cast<std::size_t>(i)];
            for (int a = 0; a < n1; ++a) {
                for (int b = 0; b < ci.cols(); ++b) {
                    c_trip[static_cast<std::size_t>(i)].emplace_back(u0 + a, hd[static_cast<std::size_t>(b)], ci(a, b));
                }
            }
        }
    }

    ops.mass_u = BlockDiagonalMatrix(n1, std::move(blocks));
    ops.mass_h.resize(ops.m_h, ops.m_h);
    ops.mass_h.setFromTriplets(mh_trip.begin(), mh_trip.end());
    for (int i = 0; i < dim; ++i) {
        SparseMatrix ci(ops.m_u, ops.m_h);
        ci.setFromTriplets(c_trip[static_cast<std::size_t>(i)].begin(), c_trip[static_cast<std::size_t>(i)].end());
        ops.gradient.push_back(std::move(ci));
    }
    return ops;
}

std::vector<SparseMatrix> assemble_divergence(const Mesh& mesh, const DofMap& dofs, const BcSpec& bc)
{
    check_inputs(mesh, dofs, bc);
    const int dim = mesh.dim();
    const Tables& t = tables(dim);
    const int n1 = dim + 1;
    const int n2 = dofs.h_per_cell();
    const auto facet_of = cell_facet_table(mesh);
    std::vector<std::vector<Eigen::Triplet<double>>> trip(static_cast<std::size_t>(dim));

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellGeometry geo = cell_geometry(mesh, c);
        std::vector<Eigen::MatrixXd> local(static_cast<std::size_t>(dim), Eigen::MatrixXd::Zero(n2, n1));
        for (int q = 0; q < t.volume.size(); ++q) {
            const double w = t.volume.weights(q) * geo.det;
            const Eigen::RowVectorXd nb = t.p2.values.row(q);
            const Eigen::MatrixXd grad = geo.jinv_t * t.p1.gradients[static_cast<std::size_t>(q)];
            for (int i = 0; i < dim; ++i) {
                local[static_cast<std::size_t>(i)].noalias() -= w * nb.transpose() * grad.row(i);
            }
        }
        for (int k = 0; k <= dim; ++k) {
            const int f = facet_of[static_cast<std::size_t>(c * n1 + k)];
            if (f >= 0 && bc.is_dirichlet(mesh.facet_marker(f))) {
                continue;
            }
            const FacetFrame fr = facet_frame(geo, dim, k);
            const auto& p1 = t.p1_facet[static_cast<std::size_t>(k)];
            const auto& p2 = t.p2_facet[static_cast<std::size_t>(k)];
            for (int q = 0; q < t.facet.size(); ++q) {
                const double w = t.facet.weights(q) * fr.measure / t.facet_ref_measure;
                const Eigen::RowVectorXd n = p1.values.row(q);
                const Eigen::RowVectorXd nb = p2.values.row(q);
                for (int i = 0; i < dim; ++i) {
                    local[static_cast<std::size_t>(i)].noalias() += (w * fr.normal(i)) * nb.transpose() * n;
                }
            }
        }
        const auto hd = dofs.h_dofs(c);
        for (int i = 0; i < dim; ++i) {
            for (int b = 0; b < n2; ++b) {
                for (int a = 0; a < n1; ++a) {
                    trip[static_cast<std::size_t>(i)].emplace_back(hd[static_cast<std::size_t>(b)], c * n1 + a,
                                                                   local[static_cast<std::size_t>(i)](b, a));
                }
            }
        }
    }
    std::vector<SparseMatrix> out;
    for (int i = 0; i < dim; ++i) {
        SparseMatrix d(dofs.m_h(), dofs.m_u());
        d.setFromTriplets(trip[static_cast<std::size_t>(i)].begin(), trip[static_cast<std::size_t>(i)].end());
        out.push_back(std::move(d));
    }
    return out;
}

Eigen::VectorXd apply_mu_inverse(const BlockDiagonalMatrix& mass_u, const Eigen::VectorXd& v)
{
    return mass_u.solve(v);
}

SemidiscreteRhs assemble_semidiscrete_rhs(const AssembledOperators& ops, const Eigen::VectorXd& h,
                                          const std::vector<Eigen::VectorXd>& u)
{
    if (h.size() != ops.m_h || static_cast<int>(u.size()) != ops.dim) {
        throw ContractError("assemble_semidiscrete_rhs: expected h of length " + std::to_string(ops.m_h) + " and "
                            + std::to_string(ops.dim) + " velocity components");
    }
    SemidiscreteRhs rhs;
    rhs.h = -ops.f;
    for (int i = 0; i < ops.dim; ++i) {
        const auto& ui = u[static_cast<std::size_t>(i)];
        if (ui.size() != ops.m_u) {
            throw ContractError("assemble_semidiscrete_rhs: velocity component " + std::to_string(i)
                                + " has length " + std::to_string(ui.size()) + ", expected "
                                + std::to_string(ops.m_u));
        }
        const auto& ci = ops.gradient[static_cast<std::size_t>(i)];
        rhs.u.push_back(-(ci * h) - ops.g[static_cast<std::size_t>(i)]);
        rhs.h.noalias() += ci.transpose() * ui;
    }
    return rhs;
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& matrix)
{
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    out << std::setprecision(17);
    for (int r = 0; r < matrix.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

} // namespace p1dgp2
