#include "p1dgp2/dispersion1d.hpp"

#include "p1dgp2/assembly.hpp"
#include "p1dgp2/error.hpp"
#include "p1dgp2/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace p1dgp2 {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

std::string format_phi(double phi)
{
    std::ostringstream s;
    s << std::setprecision(17) << phi;
    return s.str();
}

} // namespace

SymbolMatrix symbol_matrix(double phi, double w)
{
    const cd e = std::exp(I * phi);
    const cd eh = std::exp(I * (0.5 * phi));
    const cd em = std::exp(-I * phi);
    SymbolMatrix s;
    s << -2.0 * I * w, -I * w * e, -5.0 + e, 4.0 * eh,
         -I * w, -2.0 * I * w * e, -1.0 + 5.0 * e, -4.0 * eh,
         25.0 - 5.0 * em, -25.0 + 5.0 * e, -I * w * (8.0 - 2.0 * std::cos(phi)), -4.0 * I * w * std::cos(0.5 * phi),
         -20.0, 20.0 * e, -2.0 * I * w * (1.0 + e), -16.0 * I * w * eh;
    return s;
}

DispersionBranches dispersion_closed_form(double phi)
{
    const double c = std::cos(phi);
    const double inner = 474.0 + 448.0 * c - 22.0 * std::cos(2.0 * phi);
    const double denom = 6.0 - 2.0 * c;
    if (inner < -1e-12) {
        throw InvariantError("dispersion relation: negative inner radicand at phi = " + format_phi(phi));
    }
    const double root = std::sqrt(std::max(inner, 0.0));
    const double lower = (26.0 + 4.0 * c - root) / denom;
    const double upper = (26.0 + 4.0 * c + root) / denom;
    if (lower < -1e-12) {
        throw InvariantError("dispersion relation: negative lower radicand at phi = " + format_phi(phi));
    }
    return {2.0 * std::sqrt(std::max(lower, 0.0)), 2.0 * std::sqrt(upper)};
}

Eigen::Vector4cd normal_mode(double phi, Branch branch)
{
    const DispersionBranches b = dispersion_closed_form(phi);
    const double w = branch == Branch::Lower ? b.lower : b.upper;
    Eigen::JacobiSVD<SymbolMatrix> svd(symbol_matrix(phi, w), Eigen::ComputeFullV);
    const Eigen::Vector4d sigma = svd.singularValues();
    if (sigma(3) > 1e-8 * sigma(0) || sigma(2) <= 1e-8 * sigma(0)) {
        throw NumericalError("degenerate or missing normal mode at phi = " + format_phi(phi));
    }
    return svd.matrixV().col(3).normalized();
}

double mode_discontinuity(double phi, Branch branch)
{
    const Eigen::Vector4cd v = normal_mode(phi, branch);
    return std::abs(v(0) - v(1));
}

DispersionSweep dispersion_sweep(int n_samples)
{
    if (n_samples < 2) {
        throw ContractError("dispersion sweep needs at least 2 samples");
    }
    DispersionSweep sweep;
    sweep.max_lower = -1.0;
    sweep.min_upper = 1e300;
    for (int j = 1; j <= n_samples; ++j) {
        DispersionSample s;
        s.phi = std::numbers::pi * j / n_samples;
        const DispersionBranches b = dispersion_closed_form(s.phi);
        s.w_lower = b.lower;
        s.w_upper = b.upper;
        s.disc_lower = mode_discontinuity(s.phi, Branch::Lower);
        s.disc_upper = mode_discontinuity(s.phi, Branch::Upper);
        if (!(s.disc_lower < s.disc_upper)) {
            throw InvariantError("lower-branch mode is not more continuous than the upper one at phi = " +
                                 format_phi(s.phi));
        }
        sweep.max_lower = std::max(sweep.max_lower, s.w_lower);
        sweep.min_upper = std::min(sweep.min_upper, s.w_upper);
        sweep.samples.push_back(s);
    }
    if (n_samples >= 3) {
        sweep.monotone_checked = true;
        for (std::size_t j = 1; j < sweep.samples.size(); ++j) {
            if (!(sweep.samples[j].w_lower > sweep.samples[j - 1].w_lower)) {
                throw InvariantError("lower dispersion branch is not increasing at phi = " +
                                     format_phi(sweep.samples[j].phi));
            }
        }
    }
    if (!(sweep.gap() > 0.0)) {
        throw InvariantError("dispersion branches overlap: no spectral gap");
    }
    return sweep;
}

void write_dispersion_csv(std::ostream& out, const DispersionSweep& sweep)
{
    out << "phi,w_lower,w_upper,disc_lower,disc_upper\n" << std::setprecision(17);
    for (const DispersionSample& s : sweep.samples) {
        out << s.phi << ',' << s.w_lower << ',' << s.w_upper << ',' << s.disc_lower << ',' << s.disc_upper << '\n';
    }
}

void write_dispersion_csv(const std::filesystem::path& path, const DispersionSweep& sweep)
{
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    write_dispersion_csv(out, sweep);
}

bool ConsistencyReport::passed() const
{
    return max_frequency_error <= tolerance && max_eigen_residual <= tolerance &&
           full_spectrum_error <= tolerance && stencil_error <= 1e-12;
}

ConsistencyReport semidiscrete_consistency_check(int elements)
{
    if (elements < 3) {
        throw ContractError("consistency check needs at least 3 elements");
    }
    const double length = 1.0;
    const double dx = length / elements;
    const Mesh mesh = generate_interval_mesh(elements, length, true);
    const DofMap dofs(mesh);
    const AssembledOperators ops = assemble(mesh, dofs, BcSpec{});
    const SparseMatrix a = laplacian_operator(ops);
    const Eigen::MatrixXcd ad = Eigen::MatrixXd(a).cast<cd>();
    const Eigen::MatrixXcd md = Eigen::MatrixXd(ops.mass_h).cast<cd>();
    const double a_norm = Eigen::MatrixXd(a).cwiseAbs().rowwise().sum().maxCoeff();

    // Node positions of the h DOFs (vertices and midpoints), unwrapped per cell.
    Eigen::VectorXd x(ops.m_h);
    std::vector<bool> is_mid(static_cast<std::size_t>(ops.m_h), false);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto p = mesh.cell_points(c);
        const auto h = dofs.h_dofs(c);
        x(h[0]) = p[0][0];
        x(h[1]) = p[1][0];
        x(h[2]) = 0.5 * (p[0][0] + p[1][0]);
        is_mid[static_cast<std::size_t>(h[2])] = true;
    }

    ConsistencyReport report;
    report.elements = elements;
    std::vector<double> expected_all;
    for (int m = 0; m < elements; ++m) {
        const double k = 2.0 * std::numbers::pi * m / length;
        const double phi = k * dx;
        // The vertex and midpoint plane waves span an invariant subspace.
        Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(ops.m_h, 2);
        for (int i = 0; i < ops.m_h; ++i) {
            v(i, is_mid[static_cast<std::size_t>(i)] ? 1 : 0) = std::exp(I * (k * x(i)));
        }
        const Eigen::Matrix2cd ah = v.adjoint() * ad * v;
        const Eigen::Matrix2cd mh = v.adjoint() * md * v;
        const Eigen::LLT<Eigen::Matrix2cd> chol(mh);
        Eigen::Matrix2cd reduced = chol.matrixL().solve(ah);
        reduced = chol.matrixL().solve(reduced.adjoint().eval()).adjoint().eval();
        reduced = (0.5 * (reduced + reduced.adjoint())).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(reduced);
        const DispersionBranches expected = dispersion_closed_form(phi);
        expected_all.push_back(std::pow(expected.lower / dx, 2));
        expected_all.push_back(std::pow(expected.upper / dx, 2));
        if (2 * m > elements) {
            continue;   // mirror image of elements - m
        }

        BlochMode mode;
        mode.m = m;
        mode.phi = phi;
        mode.w_lower = std::sqrt(std::max(es.eigenvalues()(0), 0.0)) * dx;
        mode.w_upper = std::sqrt(std::max(es.eigenvalues()(1), 0.0)) * dx;
        mode.expected_lower = expected.lower;
        mode.expected_upper = expected.upper;
        const Eigen::Matrix2cd y = chol.matrixU().solve(es.eigenvectors());
        for (int j = 0; j < 2; ++j) {
            const Eigen::VectorXcd xv = v * y.col(j);
            const Eigen::VectorXcd r = ad * xv - es.eigenvalues()(j) * (md * xv);
            mode.eigen_residual = std::max(mode.eigen_residual, r.norm() / (a_norm * xv.norm()));
        }
        // |w^2 - w_e^2| / max(w + w_e, 1): the frequency error once w >= 1/2, the
        // eigenvalue error near the constant mode, where sqrt amplifies round-off.
        auto freq_err = [](double w, double we) { return std::abs(w * w - we * we) / std::max(w + we, 1.0); };
        const double err = std::max(freq_err(mode.w_lower, mode.expected_lower),
                                    freq_err(mode.w_upper, mode.expected_upper));
        if (report.worst_m < 0 || err > report.max_frequency_error) {
            report.max_frequency_error = err;
            report.worst_m = m;
        }
        report.max_eigen_residual = std::max(report.max_eigen_residual, mode.eigen_residual);
        report.modes.push_back(mode);
    }

    // The Bloch frequencies must exhaust the spectrum of the assembled system.
    SpectrumOptions options;
    options.count = 0;
    options.method = EigenMethod::Dense;
    const Spectrum full = laplacian_spectrum(ops, options);
    std::ranges::sort(expected_all);
    for (int i = 0; i < ops.m_h; ++i) {
        const double e = expected_all[static_cast<std::size_t>(i)];
        report.full_spectrum_error = std::max(report.full_spectrum_error,
                                              std::abs(full.eigenvalues(i) - e) / std::max(1.0, e));
    }

    // Regular-grid stencil: cell c to the left of vertex v, cell r to its right.
    std::vector<int> right_of(static_cast<std::size_t>(mesh.n_vertices()), -1);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        right_of[static_cast<std::size_t>(dofs.h_dofs(c)[0])] = c;
    }
    const SparseMatrix ct = ops.gradient[0].transpose();
    double err = 0.0;
    auto expect = [&](const SparseMatrix& mat, int row, int col, double value) {
        err = std::max(err, std::abs(mat.coeff(row, col) - value) / std::max(1.0, std::abs(value)));
    };
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto h = dofs.h_dofs(c);
        const auto u = dofs.u_dofs(c);
        const int r = right_of[static_cast<std::size_t>(h[1])];
        const auto hr = dofs.h_dofs(r);
        const auto ur = dofs.u_dofs(r);
        // midpoint equation: dx/30 (2, 16, 2) and (4 u+ - 4 u-) / 6
        expect(ops.mass_h, h[2], h[0], 2 * dx / 30);
        expect(ops.mass_h, h[2], h[2], 16 * dx / 30);
        expect(ops.mass_h, h[2], h[1], 2 * dx / 30);
        expect(ct, h[2], u[0], 4.0 / 6);
        expect(ct, h[2], u[1], -4.0 / 6);
        // vertex equation: dx/30 (-1, 2, 8, 2, -1) and (u+ + 5u- - 5u+ - u-) / 6
        const int vtx = h[1];
        expect(ops.mass_h, vtx, h[0], -dx / 30);
        expect(ops.mass_h, vtx, h[2], 2 * dx / 30);
        expect(ops.mass_h, vtx, vtx, 8 * dx / 30);
        expect(ops.mass_h, vtx, hr[2], 2 * dx / 30);
        expect(ops.mass_h, vtx, hr[1], -dx / 30);
        expect(ct, vtx, u[0], 1.0 / 6);
        expect(ct, vtx, u[1], 5.0 / 6);
        expect(ct, vtx, ur[0], -5.0 / 6);
        expect(ct, vtx, ur[1], -1.0 / 6);
    }
    report.stencil_error = err;
    return report;
}

} // namespace p1dgp2
