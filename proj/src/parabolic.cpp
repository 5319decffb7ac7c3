#include "nls/parabolic.hpp"

#include "nls/errors.hpp"

#include <cmath>
#include <string>

namespace nls {

namespace {

void check_field(const std::optional<SpaceTimeField>& f, const Grid& grid, const TimeGrid& time,
                 const char* what) {
    if (f && !f->matches(grid, time)) {
        throw DimensionError(std::string(what) + " does not match the grids");
    }
    if (f && !f->all_finite()) throw DimensionError(std::string(what) + " has non-finite entries");
}

}  // namespace

ParabolicSolver::ParabolicSolver(Dynamics dynamics) : dyn_(std::move(dynamics)) {
    const Grid& g = dyn_.grid;
    const TimeGrid& t = dyn_.time;
    if (!dyn_.kernel) throw DimensionError("dynamics needs a kernel operator");
    if (!(dyn_.kernel->grid() == g) || !(dyn_.kernel->time() == t)) {
        throw DimensionError("kernel operator was assembled on different grids");
    }
    if (g.interior() < 2) throw DimensionError("parabolic solver needs at least two interior nodes");
    check_field(dyn_.reaction, g, t, "reaction field");
    check_field(dyn_.kernel_scale, g, t, "kernel scale field");

    time_constant_ = dyn_.kernel->time_constant() && !dyn_.reaction && !dyn_.kernel_scale;
    const int count = time_constant_ ? 1 : t.steps();
    factors_.reserve(count);
    for (int j = 0; j < count; ++j) {
        const int k = time_constant_ ? 1 : j + 1;
        factors_.emplace_back(assemble_step(k));
        const double rc = factors_.back().rcond();
        if (!(rc > 1e-14)) {
            throw StepError("singular step matrix at step " + std::to_string(k), k);
        }
    }
}

Matrix ParabolicSolver::assemble_step(int k) const {
    const Grid& g = dyn_.grid;
    const int n = g.interior();
    Matrix m = -build_laplacian(g).dense();
    m.diagonal().array() += 1.0 / dyn_.time.dt();
    Matrix nk = dyn_.kernel->matrix(k).block(1, 1, n, n);
    if (dyn_.kernel_scale) {
        const Vector c = dyn_.kernel_scale->slice(k).segment(1, n);
        nk = nk * c.asDiagonal();
    }
    m += nk;
    if (dyn_.reaction) m.diagonal() += dyn_.reaction->slice(k).segment(1, n);
    return m;
}

const Eigen::PartialPivLU<Matrix>& ParabolicSolver::lu(int k) const {
    return time_constant_ ? factors_.front() : factors_[static_cast<std::size_t>(k - 1)];
}

Matrix ParabolicSolver::step_matrix(int k) const { return assemble_step(k); }

Vector ParabolicSolver::boundary_column(int k, Side side) const {
    const Grid& g = dyn_.grid;
    const int n = g.interior();
    const int node = boundary_node(g, side);
    Vector c = dyn_.kernel->matrix(k).col(node).segment(1, n);
    const int adjacent = side == Side::left ? 0 : n - 1;
    c[adjacent] -= 1.0 / (g.h() * g.h());
    return c;
}

double ParabolicSolver::adjoint_normal_derivative(int k, Side side, const Vector& q) const {
    const Grid& g = dyn_.grid;
    if (q.size() != g.nodes()) throw DimensionError("adjoint_normal_derivative: slice length");
    return g.h() * boundary_column(k, side).dot(q.segment(1, g.interior()));
}

SpaceTimeField ParabolicSolver::forward(const ForwardProblem& p) const {
    const Grid& g = dyn_.grid;
    const TimeGrid& t = dyn_.time;
    const int n = g.interior();
    if (p.initial.size() != g.nodes()) throw DimensionError("forward: initial state length");
    check_field(p.source, g, t, "forward source");
    for (const auto& b : p.boundary) {
        if (b && b->size() != t.steps() + 1) throw DimensionError("forward: boundary data length");
    }
    SpaceTimeField u(g, t);
    u.set_slice(0, p.initial);
    const double inv_dt = 1.0 / t.dt();
    for (int k = 1; k <= t.steps(); ++k) {
        Vector rhs = inv_dt * u.row(k - 1).segment(1, n).transpose();
        if (p.source) rhs += p.source->row(k).segment(1, n).transpose();
        for (Side side : {Side::left, Side::right}) {
            const auto& data = p.boundary[side == Side::left ? 0 : 1];
            if (!data) continue;
            const double value = (*data)[k];
            if (value != 0.0) rhs -= value * boundary_column(k, side);
            u(k, boundary_node(g, side)) = value;
        }
        const Vector next = lu(k).solve(rhs);
        if (!next.allFinite()) throw StepError("non-finite state at step " + std::to_string(k), k);
        u.row(k).segment(1, n) = next.transpose();
    }
    return u;
}

SpaceTimeField ParabolicSolver::backward(const BackwardProblem& p) const {
    const Grid& g = dyn_.grid;
    const TimeGrid& t = dyn_.time;
    const int n = g.interior();
    if (p.terminal.size() != g.nodes()) throw DimensionError("backward: terminal state length");
    check_field(p.source, g, t, "backward source");
    SpaceTimeField q(g, t);
    q.row(t.steps()).segment(1, n) = p.terminal.segment(1, n).transpose();
    const double inv_dt = 1.0 / t.dt();
    for (int k = t.steps() - 1; k >= 0; --k) {
        Vector rhs = inv_dt * q.row(k + 1).segment(1, n).transpose();
        if (p.source) rhs += p.source->row(k + 1).segment(1, n).transpose();
        const Vector next = lu(k + 1).transpose().solve(rhs);
        if (!next.allFinite()) {
            throw StepError("non-finite adjoint at step " + std::to_string(k), k);
        }
        q.row(k).segment(1, n) = next.transpose();
    }
    return q;
}

SpaceTimeField solve_forward(const Dynamics& dynamics, const ForwardProblem& p) {
    return ParabolicSolver(dynamics).forward(p);
}

SpaceTimeField solve_backward(const Dynamics& dynamics, const BackwardProblem& p) {
    return ParabolicSolver(dynamics).backward(p);
}

SpaceTimeField align_adjoint(const SpaceTimeField& q) {
    SpaceTimeField out(q.time_rows(), q.nodes());
    for (int k = 1; k < q.time_rows(); ++k) out.row(k) = q.row(k - 1);
    return out;
}

double source_pairing(const SpaceTimeField& source, const SpaceTimeField& q, const Grid& grid,
                      const TimeGrid& time) {
    if (!source.matches(grid, time) || !q.matches(grid, time)) {
        throw DimensionError("source_pairing: field shape");
    }
    double acc = 0.0;
    for (int k = 1; k <= time.steps(); ++k) {
        acc += space_dot(source.slice(k), q.slice(k - 1), grid);
    }
    return time.dt() * acc;
}

double normal_derivative(const Vector& u, const Grid& grid, Side side) {
    if (u.size() != grid.nodes() || grid.nodes() < 3) {
        throw DimensionError("normal_derivative: slice needs >= 3 nodes matching the grid");
    }
    const double h = grid.h();
    if (side == Side::left) return -(-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    const int m = grid.nodes() - 1;
    return (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * h);
}

Vector normal_derivative(const SpaceTimeField& field, const Grid& grid, Side side) {
    Vector out(field.time_rows());
    for (int k = 0; k < field.time_rows(); ++k) {
        out[k] = normal_derivative(field.slice(k), grid, side);
    }
    return out;
}

}  // namespace nls
