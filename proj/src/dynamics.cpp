#include "p1dgp2/dynamics.hpp"

#include "p1dgp2/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace p1dgp2 {

namespace {

void check_state(const FieldState& s, const AssembledOperators& ops)
{
    if (static_cast<int>(s.u.size()) != ops.dim || s.h.size() != ops.m_h) {
        throw ContractError("field state does not match the operators");
    }
    for (const auto& ui : s.u) {
        if (ui.size() != ops.m_u) {
            throw ContractError("velocity component has the wrong length");
        }
    }
}

bool finite(const FieldState& s)
{
    if (!s.h.allFinite()) {
        return false;
    }
    for (const auto& ui : s.u) {
        if (!ui.allFinite()) {
            return false;
        }
    }
    return true;
}

} // namespace

FieldState zero_state(const AssembledOperators& ops)
{
    FieldState s;
    s.u.assign(static_cast<std::size_t>(ops.dim), Eigen::VectorXd::Zero(ops.m_u));
    s.h = Eigen::VectorXd::Zero(ops.m_h);
    return s;
}

std::vector<Point> h_node_positions(const Mesh& mesh, const DofMap& dofs)
{
    std::vector<Point> x(static_cast<std::size_t>(dofs.m_h()));
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const auto xv = mesh.vertex(v);
        std::ranges::copy(xv, x[static_cast<std::size_t>(v)].begin());
    }
    const auto edges = local_edges(mesh.dim());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto p = mesh.cell_points(c);
        const auto h = dofs.h_dofs(c);
        for (std::size_t j = 0; j < edges.size(); ++j) {
            Point mid{};
            for (int k = 0; k < 3; ++k) {
                mid[static_cast<std::size_t>(k)] =
                    0.5 * (p[static_cast<std::size_t>(edges[j][0])][static_cast<std::size_t>(k)] +
                           p[static_cast<std::size_t>(edges[j][1])][static_cast<std::size_t>(k)]);
            }
            x[static_cast<std::size_t>(h[static_cast<std::size_t>(mesh.dim() + 1) + j])] = mid;
        }
    }
    return x;
}

std::vector<Point> u_node_positions(const Mesh& mesh, const DofMap& dofs)
{
    std::vector<Point> x(static_cast<std::size_t>(dofs.m_u()));
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto p = mesh.cell_points(c);
        const auto u = dofs.u_dofs(c);
        for (std::size_t k = 0; k < u.size(); ++k) {
            x[static_cast<std::size_t>(u[k])] = p[k];
        }
    }
    return x;
}

FieldState interpolate_initial_state(const Mesh& mesh, const DofMap& dofs, const InitialCondition& ic)
{
    if (ic.u.size() > static_cast<std::size_t>(mesh.dim())) {
        throw ContractError("initial condition has more velocity components than the mesh dimension");
    }
    FieldState s;
    s.h = Eigen::VectorXd::Zero(dofs.m_h());
    if (ic.h) {
        const auto xh = h_node_positions(mesh, dofs);
        for (std::size_t i = 0; i < xh.size(); ++i) {
            s.h(static_cast<Eigen::Index>(i)) = ic.h(xh[i]);
        }
    }
    s.u.assign(static_cast<std::size_t>(mesh.dim()), Eigen::VectorXd::Zero(dofs.m_u()));
    if (!ic.u.empty()) {
        const auto xu = u_node_positions(mesh, dofs);
        for (std::size_t d = 0; d < ic.u.size(); ++d) {
            if (!ic.u[d]) {
                continue;
            }
            for (std::size_t i = 0; i < xu.size(); ++i) {
                s.u[d](static_cast<Eigen::Index>(i)) = ic.u[d](xu[i]);
            }
        }
    }
    return s;
}

InitialCondition gaussian_bump(const Point& center, double width, double amplitude)
{
    if (!(width > 0.0)) {
        throw ConfigError("gaussian width must be positive");
    }
    InitialCondition ic;
    ic.h = [=](const Point& x) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            r2 += (x[k] - center[k]) * (x[k] - center[k]);
        }
        return amplitude * std::exp(-r2 / (width * width));
    };
    return ic;
}

InitialCondition standing_wave(const std::vector<int>& modes, bool sine, double amplitude)
{
    if (modes.empty() || modes.size() > 3) {
        throw ConfigError("standing wave needs 1 to 3 mode numbers");
    }
    InitialCondition ic;
    ic.h = [=](const Point& x) {
        double v = amplitude;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const double arg = modes[k] * std::numbers::pi * x[k];
            v *= sine ? std::sin(arg) : std::cos(arg);
        }
        return v;
    };
    return ic;
}

VerletIntegrator::VerletIntegrator(const AssembledOperators& ops, double wave_speed) : ops_(ops), c_(wave_speed)
{
    if (!(wave_speed > 0.0) || !std::isfinite(wave_speed)) {
        throw ConfigError("wave speed must be positive");
    }
    for (const auto& ci : ops.gradient) {
        gradient_t_.emplace_back(ci.transpose());
    }
    auto factor = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    factor->compute(Eigen::SparseMatrix<double>(ops.mass_h));
    if (factor->info() != Eigen::Success || factor->vectorD().minCoeff() <= 0.0) {
        throw NumericalError("h mass matrix factorization failed");
    }
    mass_h_factor_ = std::move(factor);
}

void VerletIntegrator::kick(FieldState& s, double half_dt) const
{
    for (int i = 0; i < ops_.dim; ++i) {
        const auto k = static_cast<std::size_t>(i);
        Eigen::VectorXd force = ops_.gradient[k] * s.h;
        if (ops_.g.size() == ops_.gradient.size()) {
            force += ops_.g[k];
        }
        s.u[k] -= (half_dt * c_) * ops_.mass_u.solve(force);
    }
}

void VerletIntegrator::step(FieldState& s, double dt) const
{
    check_state(s, ops_);
    kick(s, 0.5 * dt);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ops_.m_h);
    for (int i = 0; i < ops_.dim; ++i) {
        rhs += gradient_t_[static_cast<std::size_t>(i)] * s.u[static_cast<std::size_t>(i)];
    }
    if (ops_.f.size() == ops_.m_h) {
        rhs -= ops_.f;
    }
    s.h += (dt * c_) * mass_h_factor_->solve(rhs);
    kick(s, 0.5 * dt);
    s.time += dt;
    if (!finite(s)) {
        std::ostringstream msg;
        msg << "non-finite field at t = " << s.time;
        throw NumericalError(msg.str());
    }
}

double VerletIntegrator::energy(const FieldState& s) const
{
    return p1dgp2::energy(s, ops_);
}

FieldState verlet_step(const FieldState& state, const AssembledOperators& ops, double dt, double wave_speed)
{
    FieldState next = state;
    VerletIntegrator(ops, wave_speed).step(next, dt);
    return next;
}

double energy(const FieldState& s, const AssembledOperators& ops)
{
    check_state(s, ops);
    double e = 0.5 * s.h.dot(ops.mass_h * s.h);
    for (const auto& ui : s.u) {
        e += 0.5 * ui.dot(ops.mass_u.multiply(ui));
    }
    return e;
}

double stable_dt_estimate(const AssembledOperators& ops, double wave_speed, EigenMethod method)
{
    if (!(wave_speed > 0.0)) {
        throw ConfigError("wave speed must be positive");
    }
    const double lmax = max_eigenvalue(ops, method);
    if (!(lmax > 0.0)) {
        throw NumericalError("discrete Laplacian has no positive eigenvalue");
    }
    return 2.0 / (wave_speed * std::sqrt(lmax));
}

int steps_for(double t_end, double dt)
{
    if (!(dt > 0.0) || !(t_end >= 0.0)) {
        throw ConfigError("need dt > 0 and t_end >= 0");
    }
    return static_cast<int>(std::llround(t_end / dt));
}

double SimulationResult::max_abs_energy_error() const
{
    double m = 0.0;
    for (const auto& e : energy) {
        m = std::max(m, std::abs(e.energy_error));
    }
    return m;
}

SimulationResult simulate(const AssembledOperators& ops, const FieldState& initial, const SimulationConfig& config,
                          const SnapshotCallback& on_snapshot)
{
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
        throw ConfigError("dt must be positive");
    }
    if (config.n_steps < 0 || config.energy_stride < 1 || config.snapshot_stride < 0) {
        throw ConfigError("n_steps must be >= 0 and energy_stride >= 1");
    }
    SimulationResult result;
    if (!config.force_dt) {
        result.stable_dt = config.stable_dt ? *config.stable_dt : stable_dt_estimate(ops, config.wave_speed);
        if (config.dt > result.stable_dt) {
            std::ostringstream msg;
            msg << "dt = " << config.dt << " exceeds the stability limit " << result.stable_dt
                << " (2/(c sqrt(lambda_max))); override with force_dt";
            throw ConfigError(msg.str());
        }
    }
    const VerletIntegrator integrator(ops, config.wave_speed);
    FieldState state = initial;
    check_state(state, ops);
    const double e0 = integrator.energy(state);
    auto record = [&](int step) {
        const double e = integrator.energy(state);
        result.energy.push_back({step, state.time, e, e0 != 0.0 ? (e - e0) / e0 : e - e0});
    };
    record(0);
    if (on_snapshot && config.snapshot_stride > 0) {
        on_snapshot(state, 0);
    }
    for (int n = 1; n <= config.n_steps; ++n) {
        try {
            integrator.step(state, config.dt);
            result.steps_taken = n;
            if (n % config.energy_stride == 0 || n == config.n_steps) {
                record(n);
                // The quadratic energy overflows before the fields do.
                if (!std::isfinite(result.energy.back().energy)) {
                    std::ostringstream msg;
                    msg << "energy overflow at t = " << state.time;
                    throw NumericalError(msg.str());
                }
            }
        } catch (const NumericalError& e) {
            result.failure = std::string(e.what()) + " (step " + std::to_string(n) + ")";
            result.final_state = std::move(state);
            return result;
        }
        if (on_snapshot && config.snapshot_stride > 0 && n % config.snapshot_stride == 0) {
            on_snapshot(state, n);
        }
    }
    result.completed = true;
    result.final_state = std::move(state);
    return result;
}

} // namespace p1dgp2
