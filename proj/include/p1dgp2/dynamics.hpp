#pragma once

#include "p1dgp2/assembly.hpp"
#include "p1dgp2/spectral.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace p1dgp2 {

struct FieldState {
    std::vector<Eigen::VectorXd> u;   // one coefficient vector per velocity component
    Eigen::VectorXd h;
    double time = 0.0;
};

FieldState zero_state(const AssembledOperators& ops);

// Physical positions of the DOFs. h: vertices, then edge midpoints (global
// numbering). u: cell vertices in DofMap order, unwrapped across a periodic seam.
std::vector<Point> h_node_positions(const Mesh& mesh, const DofMap& dofs);
std::vector<Point> u_node_positions(const Mesh& mesh, const DofMap& dofs);

struct InitialCondition {
    ScalarField h;                  // empty => 0
    std::vector<ScalarField> u;     // empty or per component; empty entries => 0
};

// Nodal interpolation: P2 nodes for h, per-cell P1 nodes for u.
FieldState interpolate_initial_state(const Mesh& mesh, const DofMap& dofs, const InitialCondition& ic);

// exp(-|x - center|^2 / width^2) * amplitude, zero velocity.
InitialCondition gaussian_bump(const Point& center, double width, double amplitude = 1.0);
// prod_i cos(m_i pi x_i) (Neumann-compatible) or prod_i sin(m_i pi x_i)
// (Dirichlet-compatible) on the unit box, zero velocity.
InitialCondition standing_wave(const std::vector<int>& modes, bool sine, double amplitude = 1.0);

// Stormer-Verlet for M^u du_i/dt = -c (C_i h + g_i), M^h dh/dt = c (sum_i C_i^T u_i - f):
//   u^{n+1/2} = u^n - dt/2 c (M^u)^{-1} (C h^n + g)
//   h^{n+1}   = h^n + dt c (M^h)^{-1} (sum_i C_i^T u_i^{n+1/2} - f)
//   u^{n+1}   = u^{n+1/2} - dt/2 c (M^u)^{-1} (C h^{n+1} + g)
// The M^h factorization is computed once. Negative dt integrates backwards.
class VerletIntegrator {
public:
    explicit VerletIntegrator(const AssembledOperators& ops, double wave_speed = 1.0);

    // Throws ContractError on a state of the wrong shape and NumericalError
    // when the result is not finite.
    void step(FieldState& state, double dt) const;
    double energy(const FieldState& state) const;
    double wave_speed() const noexcept { return c_; }
    const AssembledOperators& operators() const noexcept { return ops_; }

private:
    void kick(FieldState& state, double half_dt) const;

    const AssembledOperators& ops_;
    double c_;
    std::vector<SparseMatrix> gradient_t_;
    std::shared_ptr<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> mass_h_factor_;
};

FieldState verlet_step(const FieldState& state, const AssembledOperators& ops, double dt, double wave_speed = 1.0);

// E = 1/2 sum_i u_i^T M^u u_i + 1/2 h^T M^h h.
double energy(const FieldState& state, const AssembledOperators& ops);

// 2 / (c sqrt(lambda_max)).
double stable_dt_estimate(const AssembledOperators& ops, double wave_speed = 1.0,
                          EigenMethod method = EigenMethod::Auto);

struct SimulationConfig {
    double dt = 0.0;
    int n_steps = 0;
    int energy_stride = 1;
    int snapshot_stride = 0;         // 0 => no snapshots
    double wave_speed = 1.0;
    bool force_dt = false;           // skip the stability check
    std::optional<double> stable_dt; // precomputed estimate; computed on demand otherwise
};

// n_steps for a run to t_end (rounded to the nearest whole step).
int steps_for(double t_end, double dt);

struct EnergySample {
    int step = 0;
    double time = 0.0;
    double energy = 0.0;
    double energy_error = 0.0;   // (E - E0) / E0, or E - E0 when E0 = 0
};

struct SimulationResult {
    std::vector<EnergySample> energy;
    FieldState final_state;
    int steps_taken = 0;
    bool completed = false;
    std::string failure;          // set when the run stopped early
    double stable_dt = 0.0;       // 0 when the check was skipped
    double max_abs_energy_error() const;
};

using SnapshotCallback = std::function<void(const FieldState&, int step)>;

// Energy is recorded at step 0, every energy_stride steps, and at the final
// step. A non-finite state stops the run and returns the partial series with
// completed = false. Throws ConfigError for dt <= 0, n_steps < 0, a bad
// stride, or dt above the stability estimate without force_dt.
SimulationResult simulate(const AssembledOperators& ops, const FieldState& initial, const SimulationConfig& config,
                          const SnapshotCallback& on_snapshot = {});

} // namespace p1dgp2
