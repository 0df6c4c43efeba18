#pragma once

#include "p1dgp2/assembly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace p1dgp2 {

// Eigenvalues of the discrete Laplacian (M^h)^{-1} A, A = sum_i C_i^T (M^u)^{-1} C_i,
// obtained from the symmetric generalized problem A v = lambda M^h v.
struct Spectrum {
    Eigen::VectorXd eigenvalues;                 // ascending; the lowest ones requested
    std::optional<Eigen::MatrixXd> eigenvectors; // columns match `eigenvalues`
    double null_tolerance = 1e-8;                // relative to max(1, lambda_max)
    double lambda_max = 0.0;
    bool complete = false;                       // true when every eigenvalue was computed
};

enum class EigenMethod { Auto, Dense, Iterative };

struct SpectrumOptions {
    int count = 20;               // lowest eigenvalues kept (all of them for a complete dense solve if <= 0)
    bool vectors = false;
    EigenMethod method = EigenMethod::Auto;
    int dense_threshold = 3000;   // Auto uses the dense solver below this many h DOFs
    double null_tolerance = 1e-8;
    double residual_tolerance = 1e-9;
};

// A = sum_i C_i^T (M^u)^{-1} C_i, explicitly symmetrized.
SparseMatrix laplacian_operator(const AssembledOperators& ops);

// Throws NumericalError when M^h is not positive definite or the iterative
// solver fails to converge.
Spectrum laplacian_spectrum(const AssembledOperators& ops, const SpectrumOptions& options = {});

int null_space_dimension(const Spectrum& spectrum);
std::optional<double> smallest_nonzero_eigenvalue(const Spectrum& spectrum);

// Largest eigenvalue, 1e-8 relative. Iterative falls back to dense on non-convergence
// when the problem is small enough, otherwise throws NumericalError.
double max_eigenvalue(const AssembledOperators& ops, EigenMethod method = EigenMethod::Auto);

// ||A v - lambda M v|| / (||A||_inf ||v||).
double eigen_residual(const SparseMatrix& a, const SparseMatrix& m, double lambda, const Eigen::VectorXd& v);

struct SpuriousLevel {
    std::string label;
    int null_count = 0;
    std::optional<double> smallest_nonzero;
    // Indices k (into the nonzero eigenvalues) whose value dropped by more
    // than a factor 2 relative to the previous level.
    std::vector<int> flagged;
};

struct SpuriousReport {
    std::vector<SpuriousLevel> levels;
    bool any_flagged() const;
};

// Levels are ordered coarse to fine. `labels` may be empty.
SpuriousReport spurious_mode_report(const std::vector<Spectrum>& sequence,
                                    const std::vector<std::string>& labels = {});

} // namespace p1dgp2
