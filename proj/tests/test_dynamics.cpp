#include <doctest.h>

#include "p1dgp2/dispersion1d.hpp"
#include "p1dgp2/dynamics.hpp"
#include "p1dgp2/error.hpp"
#include "p1dgp2/mesh_io.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace p1dgp2;
using testing_support::data_path;

namespace {

FieldState random_state(const AssembledOperators& ops, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    FieldState s = zero_state(ops);
    for (int i = 0; i < ops.m_h; ++i) {
        s.h(i) = nd(rng);
    }
    for (auto& u : s.u) {
        for (int i = 0; i < ops.m_u; ++i) {
            u(i) = nd(rng);
        }
    }
    return s;
}

double state_diff(const FieldState& a, const FieldState& b)
{
    double num = (a.h - b.h).squaredNorm(), den = a.h.squaredNorm();
    for (std::size_t i = 0; i < a.u.size(); ++i) {
        num += (a.u[i] - b.u[i]).squaredNorm();
        den += a.u[i].squaredNorm();
    }
    return std::sqrt(num / den);
}

double max_energy_ratio(const AssembledOperators& ops, const FieldState& s0, double dt, int steps)
{
    const VerletIntegrator vi(ops);
    FieldState s = s0;
    const double e0 = vi.energy(s);
    double ratio = 1.0;
    for (int n = 0; n < steps; ++n) {
        try {
            vi.step(s, dt);
        } catch (const NumericalError&) {
            return INFINITY;
        }
        ratio = std::max(ratio, vi.energy(s) / e0);
    }
    return ratio;
}

} // namespace

TEST_CASE("zero state stays zero")
{
    const Mesh mesh = load_mesh(data_path("square_a0p05"));
    const auto ops = assemble(mesh, DofMap(mesh), BcSpec::all_dirichlet(mesh));
    const VerletIntegrator vi(ops);
    FieldState s = zero_state(ops);
    for (int n = 0; n < 50; ++n) {
        vi.step(s, 0.01);
    }
    CHECK(s.h.norm() == 0.0);
    CHECK(s.u[0].norm() == 0.0);
    CHECK(std::abs(s.time - 0.5) <= 1e-12);
}

TEST_CASE("a step followed by a reversed step is the identity")
{
    std::vector<Mesh> meshes;
    meshes.push_back(generate_interval_mesh(10, 1.0));
    meshes.push_back(load_mesh(data_path("square_a0p05")));
    meshes.push_back(load_mesh(data_path("cube_v0p03")));
    for (const Mesh& mesh : meshes) {
        BcSpec bc = BcSpec::all_dirichlet(mesh);
        bc.g = [](const Point& x) { return x[0] * x[0] - 0.3; };
        const auto ops = assemble(mesh, DofMap(mesh), bc);
        const double dt = 0.5 * stable_dt_estimate(ops);
        const FieldState s0 = random_state(ops, 7);
        FieldState s = s0;
        const VerletIntegrator vi(ops);
        vi.step(s, dt);
        CHECK(state_diff(s, s0) > 1e-6);
        vi.step(s, -dt);
        CHECK(state_diff(s, s0) <= 1e-11);
        CHECK(std::abs(s.time) <= 1e-15);
    }
}

TEST_CASE("energy")
{
    const Mesh mesh = load_mesh(data_path("square_a0p05"));
    const auto ops = assemble(mesh, DofMap(mesh), BcSpec::all_neumann(mesh));
    CHECK(energy(zero_state(ops), ops) == 0.0);
    FieldState s = random_state(ops, 1);
    const double e = energy(s, ops);
    const double manual = 0.5 * s.h.dot(Eigen::MatrixXd(ops.mass_h) * s.h) +
                          0.5 * s.u[0].dot(Eigen::MatrixXd(ops.mass_u.to_sparse()) * s.u[0]) +
                          0.5 * s.u[1].dot(Eigen::MatrixXd(ops.mass_u.to_sparse()) * s.u[1]);
    CHECK(std::abs(e - manual) <= 1e-12 * manual);
    s.h *= 2.0;
    s.u[0] *= 2.0;
    s.u[1] *= 2.0;
    CHECK(std::abs(energy(s, ops) - 4.0 * e) <= 1e-12 * e);
    s.u.pop_back();
    CHECK_THROWS_AS(energy(s, ops), ContractError);
}

TEST_CASE("a discrete plane wave oscillates at the leapfrog-modified frequency")
{
    const int n = 8;
    const double dx = 1.0 / n;
    const Mesh mesh = generate_interval_mesh(n, 1.0, true);
    const auto ops = assemble(mesh, DofMap(mesh), BcSpec{});
    const Eigen::MatrixXd a(laplacian_operator(ops)), m(ops.mass_h);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, m);
    // Lowest nonzero mode: the m = 1 lower branch.
    const double omega = dispersion_closed_form(2 * std::numbers::pi / n).lower / dx;
    CHECK(std::abs(std::sqrt(es.eigenvalues()(1)) - omega) <= 1e-8 * omega);
    const Eigen::VectorXd v = es.eigenvectors().col(1);

    const double dt = 0.4 * stable_dt_estimate(ops);
    const double omega_num = 2.0 * std::asin(omega * dt / 2.0) / dt;
    FieldState s = zero_state(ops);
    s.h = v;
    const VerletIntegrator vi(ops);
    for (int step = 1; step <= 400; ++step) {
        vi.step(s, dt);
        if (step % 40 == 0) {
            const double coeff = v.dot(m * s.h);   // v is M-orthonormal
            CHECK(std::abs(coeff - std::cos(omega_num * step * dt)) <= 1e-10);
        }
    }
}

TEST_CASE("stability estimate")
{
    SUBCASE("single 1D element against a dense oracle")
    {
        const Mesh mesh = generate_interval_mesh(1, 1.0);
        const auto ops = assemble(mesh, DofMap(mesh), BcSpec::all_neumann(mesh));
        const Eigen::MatrixXd a(laplacian_operator(ops)), m(ops.mass_h);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, m);
        CHECK(std::abs(stable_dt_estimate(ops) - 2.0 / std::sqrt(es.eigenvalues().maxCoeff())) <= 1e-12);
        CHECK(std::abs(stable_dt_estimate(ops, 2.0) - 1.0 / std::sqrt(es.eigenvalues().maxCoeff())) <= 1e-12);
    }
    SUBCASE("refinement decreases the estimate")
    {
        double previous = INFINITY;
        for (const char* name : {"square_a0p1", "square_q36", "square_a0p01"}) {
            const Mesh mesh = load_mesh(data_path(name));
            const double dt = stable_dt_estimate(assemble(mesh, DofMap(mesh), BcSpec::all_dirichlet(mesh)));
            CHECK(dt < previous);
            previous = dt;
        }
    }
    SUBCASE("linear stability boundary")
    {
        const Mesh mesh = load_mesh(data_path("square_q36"));
        for (bool dirichlet : {false, true}) {
            const auto ops = assemble(mesh, DofMap(mesh),
                                      dirichlet ? BcSpec::all_dirichlet(mesh) : BcSpec::all_neumann(mesh));
            const double est = stable_dt_estimate(ops);
            const FieldState s0 = random_state(ops, 5);
            // Below the bound the energy of every mode stays within 1/(1 - (0.95)^2) of its start.
            CHECK(max_energy_ratio(ops, s0, 0.95 * est, 10000) <= 1.0 / (1.0 - 0.95 * 0.95));
            CHECK(max_energy_ratio(ops, s0, 1.05 * est, 1000) > 10.0);
        }
    }
}

TEST_CASE("second-order convergence on a 1D standing wave")
{
    const Mesh mesh = generate_interval_mesh(16, 1.0);
    const DofMap dofs(mesh);
    const auto ops = assemble(mesh, dofs, BcSpec::all_neumann(mesh));
    const FieldState s0 = interpolate_initial_state(mesh, dofs, standing_wave({1}, false));
    // Exact semi-discrete solution from the eigen-decomposition of (A, M^h).
    const Eigen::MatrixXd a(laplacian_operator(ops)), m(ops.mass_h);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, m);
    const Eigen::VectorXd coef = es.eigenvectors().transpose() * (m * s0.h);
    auto exact = [&](double t) {
        Eigen::VectorXd ch(coef.size()), cu(coef.size());
        for (int k = 0; k < coef.size(); ++k) {
            const double w = std::sqrt(std::max(es.eigenvalues()(k), 0.0));
            ch(k) = coef(k) * std::cos(w * t);
            cu(k) = w > 1e-9 ? coef(k) * std::sin(w * t) / w : coef(k) * t;
        }
        FieldState s = zero_state(ops);
        s.h = es.eigenvectors() * ch;
        s.u[0] = -ops.mass_u.solve(ops.gradient[0] * (es.eigenvectors() * cu));
        return s;
    };
    std::vector<double> err, eerr;
    for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
        SimulationConfig cfg;
        cfg.dt = dt;
        cfg.n_steps = steps_for(1.0, dt);
        const auto r = simulate(ops, s0, cfg);
        REQUIRE(r.completed);
        const FieldState ex = exact(r.final_state.time);
        const Eigen::VectorXd eh = r.final_state.h - ex.h, eu = r.final_state.u[0] - ex.u[0];
        err.push_back(std::sqrt(eh.dot(m * eh) + eu.dot(ops.mass_u.multiply(eu))));
        eerr.push_back(r.max_abs_energy_error());
    }
    for (std::size_t k = 1; k < err.size(); ++k) {
        CHECK(std::abs(std::log2(err[k - 1] / err[k]) - 2.0) <= 0.2);
        CHECK(std::abs(std::log2(eerr[k - 1] / eerr[k]) - 2.0) <= 0.2);
    }
}

TEST_CASE("simulate")
{
    const Mesh mesh = load_mesh(data_path("square_q36"));
    const DofMap dofs(mesh);
    const auto ops = assemble(mesh, dofs, BcSpec::all_neumann(mesh));
    const FieldState s0 = interpolate_initial_state(mesh, dofs, gaussian_bump({0.5, 0.5, 0.0}, 0.2));

    SUBCASE("energy stride")
    {
        SimulationConfig cfg;
        cfg.dt = 0.001;
        cfg.n_steps = 1000;
        cfg.energy_stride = 100;
        const auto r = simulate(ops, s0, cfg);
        CHECK(r.completed);
        CHECK(r.energy.size() == 11);
        CHECK(r.energy.front().energy_error == 0.0);
        CHECK(std::abs(r.energy.back().time - 1.0) <= 1e-12);
        CHECK(r.max_abs_energy_error() < 1e-4);
        CHECK(r.stable_dt > 0.001);
    }
    SUBCASE("snapshots")
    {
        SimulationConfig cfg;
        cfg.dt = 0.001;
        cfg.n_steps = 10;
        cfg.snapshot_stride = 5;
        std::vector<int> steps;
        simulate(ops, s0, cfg, [&](const FieldState&, int step) { steps.push_back(step); });
        CHECK(steps == std::vector<int>{0, 5, 10});
    }
    SUBCASE("refuses dt above the stability limit")
    {
        SimulationConfig cfg;
        cfg.dt = 1.5 * stable_dt_estimate(ops);
        cfg.n_steps = 10;
        CHECK_THROWS_AS(simulate(ops, s0, cfg), ConfigError);
    }
    SUBCASE("forced unstable run stops with a partial series")
    {
        SimulationConfig cfg;
        cfg.dt = 1.5 * stable_dt_estimate(ops);
        cfg.n_steps = 100000;
        cfg.force_dt = true;
        const auto r = simulate(ops, random_state(ops, 2), cfg);
        CHECK_FALSE(r.completed);
        CHECK(r.steps_taken < cfg.n_steps);
        // The quadratic energy overflows before any field entry does.
        CHECK(r.failure.find("energy overflow") != std::string::npos);
        CHECK(!r.energy.empty());
        CHECK(std::isfinite(r.energy[r.energy.size() - 2].energy));
    }
    SUBCASE("bad configuration")
    {
        SimulationConfig cfg;
        cfg.dt = 0.0;
        CHECK_THROWS_AS(simulate(ops, s0, cfg), ConfigError);
        cfg.dt = 0.001;
        cfg.energy_stride = 0;
        CHECK_THROWS_AS(simulate(ops, s0, cfg), ConfigError);
        CHECK(steps_for(20.0, 0.001) == 20000);
    }
}

TEST_CASE("initial-condition interpolation")
{
    const Mesh mesh = load_mesh(data_path("square_a0p05"));
    const DofMap dofs(mesh);
    InitialCondition ic;
    ic.h = [](const Point& x) { return 1.0 + 2.0 * x[0] - x[1]; };
    ic.u = {[](const Point& x) { return x[1]; }, {}};
    const FieldState s = interpolate_initial_state(mesh, dofs, ic);
    const auto xh = h_node_positions(mesh, dofs);
    for (int i = 0; i < dofs.m_h(); ++i) {
        CHECK(std::abs(s.h(i) - ic.h(xh[static_cast<std::size_t>(i)])) <= 1e-15);
    }
    const auto xu = u_node_positions(mesh, dofs);
    for (int i = 0; i < dofs.m_u(); ++i) {
        CHECK(s.u[0](i) == xu[static_cast<std::size_t>(i)][1]);
        CHECK(s.u[1](i) == 0.0);
    }
    // Midpoint nodes of the periodic seam cell stay inside the period.
    const Mesh ring = generate_interval_mesh(4, 1.0, true);
    const auto xr = h_node_positions(ring, DofMap(ring));
    for (const Point& p : xr) {
        CHECK(p[0] >= 0.0);
        CHECK(p[0] < 1.0);
    }
    CHECK_THROWS_AS(gaussian_bump({0, 0, 0}, 0.0), ConfigError);
    CHECK_THROWS_AS(standing_wave({}, true), ConfigError);
    CHECK(std::abs(standing_wave({1, 2}, true).h({0.5, 0.25, 0}) - 1.0) <= 1e-15);
}
