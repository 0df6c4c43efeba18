#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace p1dgp2 {

enum class Family { P1_DG, P2_CG };

// Lagrange element on the reference simplex {xi_j >= 0, sum xi_j <= 1}.
// Points are given in barycentric coordinates (lambda_0, ..., lambda_dim) with
// lambda_j = xi_j for j >= 1. P2 nodes: vertices first, then the midpoints
// of local_edges(dim).
class ReferenceElement {
public:
    ReferenceElement(int dim, Family family);

    int dim() const noexcept { return dim_; }
    Family family() const noexcept { return family_; }
    int n_local() const noexcept { return n_local_; }
    // Barycentric coordinates of the local nodes, one row per node.
    const Eigen::MatrixXd& node_coords() const noexcept { return nodes_; }

private:
    int dim_;
    Family family_;
    int n_local_;
    Eigen::MatrixXd nodes_;
};

struct BasisEvaluation {
    Eigen::VectorXd values;      // n_local
    Eigen::MatrixXd gradients;   // dim x n_local, w.r.t. reference coordinates
};

// Throws DomainError when the point is outside the reference simplex
// (any entry below -1e-12 or entries not summing to 1 within 1e-12).
BasisEvaluation eval_basis(const ReferenceElement& element, std::span<const double> barycentric);

// Basis values and reference gradients tabulated at a fixed point set.
struct Tabulation {
    Eigen::MatrixXd values;                   // n_points x n_local
    std::vector<Eigen::MatrixXd> gradients;   // per point: dim x n_local
};

struct QuadratureRule {
    int dim = 0;
    int degree = 0;
    Eigen::MatrixXd points;   // n_points x (dim + 1), barycentric
    Eigen::VectorXd weights;  // sum = 1 / dim!

    int size() const { return static_cast<int>(weights.size()); }
};

// Collapsed-coordinate (Stroud conical product) rule with Gauss-Jacobi
// factors, exact for total degree <= `degree`. dim = 0 gives the unit point
// rule used on 1D facets. Supports degree 0..6 for dim 0..3.
QuadratureRule quadrature(int dim, int degree);

// Gauss-Jacobi nodes and weights on [0, 1] for the weight (1 - x)^alpha.
void gauss_jacobi(int n, double alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

Tabulation tabulate(const ReferenceElement& element, const Eigen::MatrixXd& barycentric_points);

} // namespace p1dgp2
