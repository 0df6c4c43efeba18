#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace p1dgp2 {

// Plane-wave analysis of the 1D semi-discrete system on a regular grid, in
// the nondimensional variables phi = k dx and w = omega dx.

using SymbolMatrix = Eigen::Matrix4cd;

// Rows: the two u equations, then the vertex and midpoint h equations.
// Unknown order (u+, u-, h, h~).
SymbolMatrix symbol_matrix(double phi, double w);

struct DispersionBranches {
    double lower = 0.0;
    double upper = 0.0;
};

// Positive roots of det(symbol_matrix(phi, w)) = 0 in closed form.
DispersionBranches dispersion_closed_form(double phi);

enum class Branch { Lower, Upper };

// Unit-norm null vector of symbol_matrix(phi, w_branch) (smallest right
// singular vector). Throws NumericalError if the null space is not one-dimensional.
Eigen::Vector4cd normal_mode(double phi, Branch branch);

// |u+ - u-| of the unit-norm normal mode.
double mode_discontinuity(double phi, Branch branch);

struct DispersionSample {
    double phi = 0.0;
    double w_lower = 0.0;
    double w_upper = 0.0;
    double disc_lower = 0.0;
    double disc_upper = 0.0;
};

struct DispersionSweep {
    std::vector<DispersionSample> samples;
    double max_lower = 0.0;
    double min_upper = 0.0;
    double gap() const { return min_upper - max_lower; }
    bool monotone_checked = false;   // only claimed for three or more samples
};

// phi_j = pi j / n for j = 1..n. Throws ContractError for n < 2 and
// InvariantError if the lower branch is not increasing, the gap is not
// positive, or disc_lower >= disc_upper at some sample.
DispersionSweep dispersion_sweep(int n_samples);

void write_dispersion_csv(std::ostream& out, const DispersionSweep& sweep);
void write_dispersion_csv(const std::filesystem::path& path, const DispersionSweep& sweep);

struct BlochMode {
    int m = 0;               // wavenumber index, k = 2 pi m / L
    double phi = 0.0;
    double w_lower = 0.0;    // from the assembled operators
    double w_upper = 0.0;
    double expected_lower = 0.0;
    double expected_upper = 0.0;
    double eigen_residual = 0.0;   // of the lifted Bloch eigenvectors in the full system
};

struct ConsistencyReport {
    int elements = 0;
    std::vector<BlochMode> modes;   // m = 0 .. I/2
    double max_frequency_error = 0.0;  // |w^2 - w_e^2| / max(w + w_e, 1) over both branches
    int worst_m = -1;
    double max_eigen_residual = 0.0;
    double full_spectrum_error = 0.0;   // all Bloch frequencies vs a dense solve of the assembled system
    double stencil_error = 0.0;         // regular-grid stencil coefficients vs the assembled matrices
    double tolerance = 1e-8;
    bool passed() const;
};

// Assembles the periodic unit interval with I elements and checks every Bloch
// wavenumber against the closed-form dispersion relation. Throws ContractError for I < 3.
ConsistencyReport semidiscrete_consistency_check(int elements);

} // namespace p1dgp2
