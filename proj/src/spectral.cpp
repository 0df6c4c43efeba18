#include "p1dgp2/spectral.hpp"

#include "p1dgp2/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace p1dgp2 {

namespace {

using ColMajorMatrix = Eigen::SparseMatrix<double>;
using BlockOperator = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

double inf_norm(const SparseMatrix& a)
{
    double best = 0.0;
    for (int r = 0; r < a.outerSize(); ++r) {
        double row = 0.0;
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
            row += std::abs(it.value());
        }
        best = std::max(best, row);
    }
    return best;
}

// Cholesky-type factorization of an SPD sparse matrix; throws when the
// matrix is not positive definite.
std::unique_ptr<Eigen::SimplicialLDLT<ColMajorMatrix>> factorize_spd(const SparseMatrix& m, const char* what)
{
    auto solver = std::make_unique<Eigen::SimplicialLDLT<ColMajorMatrix>>();
    solver->compute(ColMajorMatrix(m));
    if (solver->info() != Eigen::Success || solver->vectorD().minCoeff() <= 0.0) {
        throw NumericalError(std::string(what) + " is not positive definite");
    }
    return solver;
}

struct RitzPairs {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // M-orthonormal columns
};

// Block Krylov subspace iteration with full M-orthogonalization and
// Rayleigh-Ritz extraction, restarted from the best Ritz vectors. Finds the
// `nev` largest eigenvalues of an operator T that is self-adjoint in the
// inner product <x, y> = x^T M y. The block size lets clustered or repeated
// eigenvalues converge together.
RitzPairs block_krylov_largest(const BlockOperator& apply, const SparseMatrix& m, int nev, int block, double tol)
{
    const int n = static_cast<int>(m.rows());
    const int cap = std::min(n, std::max(4 * nev + 8 * block, 160));
    const int keep = std::min(cap - block, nev + block);
    Eigen::MatrixXd q(n, cap), mq(n, cap), w(n, cap);
    int size = 0;
    std::mt19937 rng(20240611u);
    std::normal_distribution<double> normal;

    auto random_column = [&] {
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) {
            z(i) = normal(rng);
        }
        return z;
    };
    // M-orthonormalize the candidate block against the basis and append it.
    auto append = [&](Eigen::MatrixXd z) {
        const int start = size;
        for (int c = 0; c < z.cols() && size < cap; ++c) {
            Eigen::VectorXd v = z.col(c);
            for (int attempt = 0; attempt < 4; ++attempt) {
                const double before = std::sqrt(std::max(v.dot(m * v), 0.0));
                for (int pass = 0; pass < 2; ++pass) {
                    v -= q.leftCols(size) * (mq.leftCols(size).transpose() * v);
                }
                const Eigen::VectorXd mv = m * v;
                const double after = std::sqrt(std::max(v.dot(mv), 0.0));
                if (after > 1e-10 * before && after > 0.0) {
                    q.col(size) = v / after;
                    mq.col(size) = mv / after;
                    ++size;
                    break;
                }
                v = random_column();
            }
        }
        if (size > start) {
            w.middleCols(start, size - start) = apply(q.middleCols(start, size - start));
        }
        return size - start;
    };

    Eigen::MatrixXd start(n, block);
    for (int c = 0; c < block; ++c) {
        start.col(c) = random_column();
    }
    append(start);
    int last = 0;   // first column of the most recent block

    RitzPairs best;
    for (int restart = 0; restart < 60; ++restart) {
        while (true) {
            const bool full = size + block > cap || size == n;
            if (size >= nev + block || full) {
                Eigen::MatrixXd h = mq.leftCols(size).transpose() * w.leftCols(size);
                h = 0.5 * (h + h.transpose()).eval();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
                const Eigen::VectorXd theta = es.eigenvalues().reverse();
                const Eigen::MatrixXd s = es.eigenvectors().rowwise().reverse();
                const int k = std::min(nev, size);
                const Eigen::MatrixXd y = q.leftCols(size) * s.leftCols(k);
                const Eigen::MatrixXd r = w.leftCols(size) * s.leftCols(k) - y * theta.head(k).asDiagonal();
                const double scale = std::abs(theta(0));
                bool converged = k == nev;
                for (int j = 0; j < k && converged; ++j) {
                    converged = r.col(j).norm() <= tol * scale * y.col(j).norm();
                }
                if (converged || size == n) {
                    best.values = theta.head(k);
                    best.vectors = y;
                    return best;
                }
                if (full) {
                    // Thick restart: keep the leading Ritz vectors and continue from the
                    // residuals of the unconverged ones (they span the next Krylov block).
                    const int kk = std::min(keep, size);
                    const Eigen::MatrixXd sk = s.leftCols(kk);
                    const Eigen::MatrixXd nq = q.leftCols(size) * sk;
                    const Eigen::MatrixXd nmq = mq.leftCols(size) * sk;
                    const Eigen::MatrixXd nw = w.leftCols(size) * sk;
                    const Eigen::MatrixXd res = nw - nq * theta.head(kk).asDiagonal();
                    std::vector<int> pick;
                    for (int j = 0; j < kk && static_cast<int>(pick.size()) < block; ++j) {
                        if (j >= k || res.col(j).norm() > tol * scale * nq.col(j).norm()) {
                            pick.push_back(j);
                        }
                    }
                    Eigen::MatrixXd next(n, static_cast<Eigen::Index>(pick.size()));
                    for (std::size_t c = 0; c < pick.size(); ++c) {
                        next.col(static_cast<Eigen::Index>(c)) = res.col(pick[c]);
                    }
                    q.leftCols(kk) = nq;
                    mq.leftCols(kk) = nmq;
                    w.leftCols(kk) = nw;
                    size = kk;
                    last = size;
                    if (append(next) == 0) {
                        append(random_column());
                    }
                    break;
                }
            }
            const Eigen::MatrixXd next = w.middleCols(last, size - last);
            last = size;
            if (append(next) == 0) {
                last = size;
                append(random_column());
            }
        }
    }
    throw NumericalError("iterative eigensolver did not converge");
}

void check_operators(const AssembledOperators& ops)
{
    if (ops.mass_h.rows() != ops.m_h || ops.mass_u.rows() != ops.m_u ||
        static_cast<int>(ops.gradient.size()) != ops.dim) {
        throw ContractError("assembled operators are inconsistent");
    }
}

Spectrum dense_spectrum(const AssembledOperators& ops, const SparseMatrix& a, const SpectrumOptions& options)
{
    // Explicit reduction to a standard problem: L^{-1} A L^{-T} y = lambda y,
    // v = L^{-T} y. (The generalized solver of some Eigen releases returns
    // wrong eigenvalues when eigenvectors are not requested.)
    const Eigen::LLT<Eigen::MatrixXd> chol(Eigen::MatrixXd(ops.mass_h));
    if (chol.info() != Eigen::Success) {
        throw NumericalError("h mass matrix is not positive definite");
    }
    Eigen::MatrixXd reduced = Eigen::MatrixXd(a);
    chol.matrixL().solveInPlace(reduced);
    reduced.transposeInPlace();
    chol.matrixL().solveInPlace(reduced);
    reduced = 0.5 * (reduced + reduced.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced,
                                                     options.vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("dense symmetric eigensolver failed");
    }
    const int n = ops.m_h;
    const int k = options.count <= 0 ? n : std::min(options.count, n);
    Spectrum s;
    s.null_tolerance = options.null_tolerance;
    s.eigenvalues = es.eigenvalues().head(k);
    s.lambda_max = es.eigenvalues()(n - 1);
    s.complete = k == n;
    if (options.vectors) {
        Eigen::MatrixXd v = es.eigenvectors().leftCols(k);
        chol.matrixU().solveInPlace(v);
        s.eigenvectors = std::move(v);
    }
    return s;
}

Spectrum iterative_spectrum(const AssembledOperators& ops, const SparseMatrix& a, const SpectrumOptions& options)
{
    const int n = ops.m_h;
    const int k = options.count;
    if (k <= 0 || 2 * k >= n) {
        throw ConfigError("iterative eigensolver needs 0 < count < m_h / 2");
    }
    factorize_spd(ops.mass_h, "h mass matrix");
    // Shift-invert about sigma = -1: A + M is SPD because A is PSD, and the
    // lowest lambda become the largest theta = 1 / (lambda + 1).
    const SparseMatrix shifted = a + ops.mass_h;
    const auto solver = factorize_spd(shifted, "shifted Laplacian");
    const BlockOperator apply = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
        return solver->solve(Eigen::MatrixXd(ops.mass_h * x));
    };
    const RitzPairs ritz = block_krylov_largest(apply, ops.mass_h, k, 4, 1e-12);

    // Rayleigh quotients of the Ritz vectors are accurate even for lambda ~ 0.
    Eigen::VectorXd lambda(k);
    for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd& v = ritz.vectors.col(j);
        lambda(j) = v.dot(a * v) / v.dot(ops.mass_h * v);
    }
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::ranges::sort(order, [&](int x, int y) { return lambda(x) < lambda(y); });

    Spectrum s;
    s.null_tolerance = options.null_tolerance;
    s.eigenvalues.resize(k);
    Eigen::MatrixXd vectors(n, k);
    for (int j = 0; j < k; ++j) {
        s.eigenvalues(j) = lambda(order[static_cast<std::size_t>(j)]);
        vectors.col(j) = ritz.vectors.col(order[static_cast<std::size_t>(j)]);
    }
    if (options.vectors) {
        s.eigenvectors = std::move(vectors);
    }
    s.lambda_max = max_eigenvalue(ops, EigenMethod::Iterative);
    return s;
}

} // namespace

SparseMatrix laplacian_operator(const AssembledOperators& ops)
{
    check_operators(ops);
    const SparseMatrix minv = ops.mass_u.inverse_to_sparse();
    SparseMatrix a(ops.m_h, ops.m_h);
    for (const SparseMatrix& c : ops.gradient) {
        const SparseMatrix mc = minv * c;
        a += SparseMatrix(c.transpose() * mc);
    }
    const SparseMatrix at = a.transpose();
    SparseMatrix sym = 0.5 * (a + at);
    sym.prune(0.0);
    return sym;
}

Spectrum laplacian_spectrum(const AssembledOperators& ops, const SpectrumOptions& options)
{
    const SparseMatrix a = laplacian_operator(ops);
    const bool dense = options.method == EigenMethod::Dense ||
                       (options.method == EigenMethod::Auto && ops.m_h < options.dense_threshold);
    return dense ? dense_spectrum(ops, a, options) : iterative_spectrum(ops, a, options);
}

int null_space_dimension(const Spectrum& spectrum)
{
    const double threshold = spectrum.null_tolerance * std::max(1.0, spectrum.lambda_max);
    return static_cast<int>((spectrum.eigenvalues.array() < threshold).count());
}

std::optional<double> smallest_nonzero_eigenvalue(const Spectrum& spectrum)
{
    const int nulls = null_space_dimension(spectrum);
    if (nulls >= spectrum.eigenvalues.size()) {
        return std::nullopt;
    }
    return spectrum.eigenvalues(nulls);
}

double max_eigenvalue(const AssembledOperators& ops, EigenMethod method)
{
    check_operators(ops);
    const SparseMatrix a = laplacian_operator(ops);
    const bool dense = method == EigenMethod::Dense || (method == EigenMethod::Auto && ops.m_h < 3000);
    auto dense_max = [&] {
        SpectrumOptions o;
        o.count = 1;
        return dense_spectrum(ops, a, o).lambda_max;
    };
    if (dense) {
        return dense_max();
    }
    try {
        const auto solver = factorize_spd(ops.mass_h, "h mass matrix");
        const BlockOperator apply = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
            return solver->solve(Eigen::MatrixXd(a * x));
        };
        const RitzPairs ritz = block_krylov_largest(apply, ops.mass_h, 1, 2, 1e-11);
        const Eigen::VectorXd& v = ritz.vectors.col(0);
        return v.dot(a * v) / v.dot(ops.mass_h * v);
    } catch (const NumericalError&) {
        if (ops.m_h > 8000) {
            throw;
        }
        return dense_max();
    }
}

double eigen_residual(const SparseMatrix& a, const SparseMatrix& m, double lambda, const Eigen::VectorXd& v)
{
    const Eigen::VectorXd r = a * v - lambda * (m * v);
    const double scale = inf_norm(a) * v.norm();
    return scale > 0.0 ? r.norm() / scale : r.norm();
}

bool SpuriousReport::any_flagged() const
{
    return std::ranges::any_of(levels, [](const SpuriousLevel& l) { return !l.flagged.empty(); });
}

SpuriousReport spurious_mode_report(const std::vector<Spectrum>& sequence, const std::vector<std::string>& labels)
{
    SpuriousReport report;
    std::vector<double> previous;
    for (std::size_t l = 0; l < sequence.size(); ++l) {
        const Spectrum& s = sequence[l];
        SpuriousLevel level;
        level.label = l < labels.size() ? labels[l] : "level " + std::to_string(l);
        level.null_count = null_space_dimension(s);
        level.smallest_nonzero = smallest_nonzero_eigenvalue(s);
        std::vector<double> nonzero(s.eigenvalues.data() + level.null_count,
                                    s.eigenvalues.data() + s.eigenvalues.size());
        const std::size_t shared = std::min(previous.size(), nonzero.size());
        for (std::size_t k = 0; k < shared; ++k) {
            if (nonzero[k] < 0.5 * previous[k]) {
                level.flagged.push_back(static_cast<int>(k));
            }
        }
        previous = std::move(nonzero);
        report.levels.push_back(std::move(level));
    }
    return report;
}

} // namespace p1dgp2
