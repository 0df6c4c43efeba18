#pragma once

#include "p1dgp2/dofmap.hpp"
#include "p1dgp2/mesh.hpp"

#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace p1dgp2 {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Velocity mass matrix: one dense SPD block per cell, factorized on construction.
class BlockDiagonalMatrix {
public:
    BlockDiagonalMatrix() = default;
    BlockDiagonalMatrix(int block_size, std::vector<Eigen::MatrixXd> blocks);

    int block_size() const noexcept { return block_size_; }
    int n_blocks() const noexcept { return static_cast<int>(blocks_.size()); }
    int rows() const noexcept { return block_size_ * n_blocks(); }
    const Eigen::MatrixXd& block(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    // Exact per-block Cholesky solve.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    SparseMatrix to_sparse() const;
    SparseMatrix inverse_to_sparse() const;

private:
    int block_size_ = 0;
    std::vector<Eigen::MatrixXd> blocks_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
};

// Global operators of the semi-discrete system
//   M^u du_i/dt = -C_i h - g_i,   M^h dh/dt = sum_i C_i^T u_i - f.
struct AssembledOperators {
    int dim = 0;
    int m_u = 0;
    int m_h = 0;
    bool has_dirichlet = false;
    BlockDiagonalMatrix mass_u;
    SparseMatrix mass_h;
    std::vector<SparseMatrix> gradient;   // C_i, m_u x m_h
    std::vector<Eigen::VectorXd> g;       // g_i, length m_u
    Eigen::VectorXd f;                    // length m_h
};

// Volume contributions of one cell, local DOF order of DofMap.
struct ElementMatrices {
    Eigen::MatrixXd mass_u;                 // (dim+1) x (dim+1)
    Eigen::MatrixXd mass_h;                 // n_h x n_h
    std::vector<Eigen::MatrixXd> gradient;  // (dim+1) x n_h, int N_a d_i Nbar_b
};

ElementMatrices element_matrices(const Mesh& mesh, int cell);

// Assembles every operator. Dirichlet data enters weakly through the
// -int_{dOmega^D} n_i N_a Nbar_b dS term of C_i and the g_i vectors.
// Throws ConfigError when `bc` does not match the mesh markers.
AssembledOperators assemble(const Mesh& mesh, const DofMap& dofs, const BcSpec& bc);

// The h-equation operators D_i (m_h x m_u) assembled from the cellwise
// integrated-by-parts form
//   -int_K Nbar_b d_i N_a dV + sum over facets of K off dOmega^D of int n_i N_a Nbar_b dS.
// Equals C_i^T for a correct assembler.
std::vector<SparseMatrix> assemble_divergence(const Mesh& mesh, const DofMap& dofs, const BcSpec& bc);

Eigen::VectorXd apply_mu_inverse(const BlockDiagonalMatrix& mass_u, const Eigen::VectorXd& v);

struct SemidiscreteRhs {
    std::vector<Eigen::VectorXd> u;   // -C_i h - g_i
    Eigen::VectorXd h;                // sum_i C_i^T u_i - f
};

// Throws ContractError on size mismatch.
SemidiscreteRhs assemble_semidiscrete_rhs(const AssembledOperators& ops, const Eigen::VectorXd& h,
                                          const std::vector<Eigen::VectorXd>& u);

// Matrix Market coordinate format, 1-based, full precision.
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& matrix);

} // namespace p1dgp2
