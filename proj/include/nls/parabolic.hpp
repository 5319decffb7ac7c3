#pragma once

#include "nls/grid.hpp"
#include "nls/kernel.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace nls {

/// Coefficients of  u_t - Lap u + (N_k diag(c)) u + r u  on a fixed grid.
/// `reaction` is r(t,x); `kernel_scale` is c(t,theta), which multiplies the
/// kernel columns of interior nodes only. Both default to absent.
struct Dynamics {
    Grid grid;
    TimeGrid time;
    std::shared_ptr<const KernelOperator> kernel;
    std::optional<SpaceTimeField> reaction;
    std::optional<SpaceTimeField> kernel_scale;
};

struct ForwardProblem {
    Vector initial;                                  // all nodes
    std::optional<SpaceTimeField> source;            // rows 1..n_steps are used
    std::array<std::optional<Vector>, 2> boundary;   // Dirichlet data per side, indexed by k
};

struct BackwardProblem {
    Vector terminal;                        // all nodes; boundary entries ignored
    std::optional<SpaceTimeField> source;   // rows 1..n_steps are used
};

/// Implicit Euler for the forward equation and its exact discrete transpose
/// for the backward one. Step matrices are factored once at construction.
///
/// Forward, k = 1..n_steps:
///   (I/dt + A_k) u^k = u^{k-1}/dt + S^k - C_k g^k
/// Backward, k = n_steps-1..0:
///   (I/dt + A_{k+1})^T q^k = q^{k+1}/dt + G^{k+1}
/// where A_k = -Lap + N_k diag(c_k) + diag(r_k) on interior nodes and C_k
/// holds the coupling of the two boundary nodes. With these index
/// conventions
///   <u^N, q^N> - <u^0, q^0> = sum_k dt <S^k, q^{k-1}> - sum_k dt <G^k, u^k>
/// holds exactly for homogeneous boundary data.
class ParabolicSolver {
public:
    explicit ParabolicSolver(Dynamics dynamics);

    const Dynamics& dynamics() const noexcept { return dyn_; }
    const Grid& grid() const noexcept { return dyn_.grid; }
    const TimeGrid& time() const noexcept { return dyn_.time; }

    SpaceTimeField forward(const ForwardProblem& p) const;
    SpaceTimeField backward(const BackwardProblem& p) const;

    /// Dense interior step matrix I/dt + A_k.
    Matrix step_matrix(int k) const;

    /// Interior coupling column C_k of a boundary node.
    Vector boundary_column(int k, Side side) const;

    /// h * sum_i C_k[i] q_i: the transpose of Dirichlet injection at `side`.
    /// It approximates the outward normal derivative of q to O(h) and is the
    /// derivative used in every follower/adjoint boundary coupling.
    double adjoint_normal_derivative(int k, Side side, const Vector& q) const;

private:
    const Eigen::PartialPivLU<Matrix>& lu(int k) const;
    Matrix assemble_step(int k) const;

    Dynamics dyn_;
    bool time_constant_;
    std::vector<Eigen::PartialPivLU<Matrix>> factors_;
};

SpaceTimeField solve_forward(const Dynamics& dynamics, const ForwardProblem& p);
SpaceTimeField solve_backward(const Dynamics& dynamics, const BackwardProblem& p);

/// Row k of the result is q^{k-1}, the adjoint slice paired with forward
/// sources at t_k; row 0 is zero.
SpaceTimeField align_adjoint(const SpaceTimeField& q);

/// sum_{k>=1} dt <S^k, q^{k-1}>.
double source_pairing(const SpaceTimeField& source, const SpaceTimeField& q, const Grid& grid,
                      const TimeGrid& time);

/// Second-order one-sided outward normal derivative at a boundary node:
///   x = 0:  -(-3u_0 + 4u_1 - u_2) / (2h)
///   x = L:  +(3u_{n+1} - 4u_n + u_{n-1}) / (2h)
double normal_derivative(const Vector& slice, const Grid& grid, Side side);
Vector normal_derivative(const SpaceTimeField& field, const Grid& grid, Side side);

inline int boundary_node(const Grid& grid, Side side) {
    return side == Side::left ? 0 : grid.nodes() - 1;
}

}  // namespace nls
