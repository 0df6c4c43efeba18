#include "p1dgp2/reference.hpp"

#include "p1dgp2/error.hpp"
#include "p1dgp2/mesh.hpp"

#include <cmath>
#include <string>

namespace p1dgp2 {

ReferenceElement::ReferenceElement(int dim, Family family) : dim_(dim), family_(family)
{
    if (dim < 1 || dim > 3) {
        throw ConfigError("ReferenceElement: dimension must be 1, 2 or 3");
    }
    const int nv = dim + 1;
    n_local_ = family == Family::P1_DG ? nv : nv * (nv + 1) / 2;
    nodes_ = Eigen::MatrixXd::Zero(n_local_, nv);
    for (int i = 0; i < nv; ++i) {
        nodes_(i, i) = 1.0;
    }
    if (family == Family::P2_CG) {
        int k = nv;
        for (const auto& [a, b] : local_edges(dim)) {
            nodes_(k, a) = 0.5;
            nodes_(k, b) = 0.5;
            ++k;
        }
    }
}

BasisEvaluation eval_basis(const ReferenceElement& element, std::span<const double> bary)
{
    const int dim = element.dim();
    const int nv = dim + 1;
    if (static_cast<int>(bary.size()) != nv) {
        throw DomainError("eval_basis: expected " + std::to_string(nv) + " barycentric coordinates");
    }
    double sum = 0.0;
    for (double l : bary) {
        if (!(l >= -1e-12)) {
            throw DomainError("eval_basis: point outside the reference simplex");
        }
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw DomainError("eval_basis: barycentric coordinates do not sum to 1");
    }

    // d(lambda_k)/d(xi_j): -1 for k = 0, delta_kj otherwise.
    Eigen::MatrixXd dl = Eigen::MatrixXd::Zero(dim, nv);
    for (int j = 0; j < dim; ++j) {
        dl(j, 0) = -1.0;
        dl(j, j + 1) = 1.0;
    }

    BasisEvaluation out;
    out.values.resize(element.n_local());
    out.gradients.resize(dim, element.n_local());
    for (int k = 0; k < nv; ++k) {
        const double l = bary[static_cast<std::size_t>(k)];
        if (element.family() == Family::P1_DG) {
            out.values(k) = l;
            out.gradients.col(k) = dl.col(k);
        } else {
            out.values(k) = l * (2.0 * l - 1.0);
            out.gradients.col(k) = (4.0 * l - 1.0) * dl.col(k);
        }
    }
    if (element.family() == Family::P2_CG) {
        int k = nv;
        for (const auto& [a, b] : local_edges(dim)) {
            const double la = bary[static_cast<std::size_t>(a)];
            const double lb = bary[static_cast<std::size_t>(b)];
            out.values(k) = 4.0 * la * lb;
            out.gradients.col(k) = 4.0 * (lb * dl.col(a) + la * dl.col(b));
            ++k;
        }
    }
    return out;
}

Tabulation tabulate(const ReferenceElement& element, const Eigen::MatrixXd& points)
{
    Tabulation t;
    t.values.resize(points.rows(), element.n_local());
    t.gradients.reserve(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index q = 0; q < points.rows(); ++q) {
        const Eigen::VectorXd p = points.row(q).transpose();
        auto ev = eval_basis(element, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
        t.values.row(q) = ev.values.transpose();
        t.gradients.push_back(std::move(ev.gradients));
    }
    return t;
}

void gauss_jacobi(int n, double alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights)
{
    // Golub-Welsch on [-1, 1] for (1 - x)^alpha, then mapped to [0, 1].
    const double beta = 0.0;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + alpha + beta;
        jac(k, k) = (k == 0) ? (beta - alpha) / (alpha + beta + 2.0)
                             : (beta * beta - alpha * alpha) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double t = 2.0 * m + alpha + beta;
            const double b2 = 4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta)
                / (t * t * (t + 1.0) * (t - 1.0));
            jac(k, k + 1) = jac(k + 1, k) = std::sqrt(b2);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    const double mu0 = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0)
        / std::tgamma(alpha + beta + 2.0);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const double x = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        nodes(k) = 0.5 * (1.0 + x);
        // (1 - x)^alpha dx on [-1,1] -> 2^(alpha+1) (1 - t)^alpha dt on [0,1].
        weights(k) = mu0 * v0 * v0 / std::pow(2.0, alpha + 1.0);
    }
}

QuadratureRule quadrature(int dim, int degree)
{
    if (dim < 0 || dim > 3 || degree < 0 || degree > 6) {
        throw ConfigError("quadrature: unsupported dim " + std::to_string(dim) + " / degree "
                          + std::to_string(degree) + " (supported: dim 0..3, degree 0..6)");
    }
    QuadratureRule rule;
    rule.dim = dim;
    rule.degree = degree;
    if (dim == 0) {
        rule.points = Eigen::MatrixXd::Ones(1, 1);
        rule.weights = Eigen::VectorXd::Ones(1);
        return rule;
    }
    const int n = degree / 2 + 1;
    // Direction j of the collapsed cube carries the Jacobian factor (1 - t_j)^(dim - 1 - j).
    std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(dim)), w(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        gauss_jacobi(n, dim - 1 - j, x[static_cast<std::size_t>(j)], w[static_cast<std::size_t>(j)]);
    }
    int total = 1;
    for (int j = 0; j < dim; ++j) {
        total *= n;
    }
    rule.points.resize(total, dim + 1);
    rule.weights.resize(total);
    for (int idx = 0; idx < total; ++idx) {
        int rem = idx;
        double weight = 1.0;
        double scale = 1.0;   // remaining length along the collapsed direction
        Eigen::VectorXd xi(dim);
        for (int j = 0; j < dim; ++j) {
            const int k = rem % n;
            rem /= n;
            const double t = x[static_cast<std::size_t>(j)](k);
            weight *= w[static_cast<std::size_t>(j)](k);
            xi(j) = scale * t;
            scale *= (1.0 - t);
        }
        rule.points(idx, 0) = 1.0 - xi.sum();
        for (int j = 0; j < dim; ++j) {
            rule.points(idx, j + 1) = xi(j);
        }
        rule.weights(idx) = weight;
    }
    return rule;
}

} // namespace p1dgp2
