#pragma once

#include "nls/cg.hpp"
#include "nls/leader.hpp"
#include "nls/parabolic.hpp"
#include "nls/stackelberg.hpp"

#include <iosfwd>
#include <memory>

namespace nls {

/// Follower acting through Dirichlet data u(t) * profile at the endpoint
/// `side`, with a distributed leader g on omega:
///   min_u  1/2 |z - z_d|^2_{O_d} + mu/2 int_0^T |u|^2 dt.
struct BoundaryFollowerProblem {
    std::shared_ptr<const ParabolicSolver> solver;
    Side side = Side::right;
    double profile = 1.0;
    RegionMask leader_region;
    RegionMask target_region;
    double mu = 100.0;
    SpaceTimeField leader;   // g
    SpaceTimeField target;   // z_d
    Vector initial;          // z0

    const Grid& grid() const { return solver->grid(); }
    const TimeGrid& time() const { return solver->time(); }
    void validate() const;
    CoupledSystem system() const;
};

struct BoundaryOptimality {
    SpaceTimeField z;
    SpaceTimeField p;
    Vector u_hat;   // u_hat[k] at t_k, u_hat[0] = 0
    FixedPointTrace trace;
};

/// dt * sum_{k>=1} a_k b_k.
double series_dot(const Vector& a, const Vector& b, const TimeGrid& time);

SpaceTimeField boundary_state(const BoundaryFollowerProblem& problem, const Vector& u);

BoundaryOptimality solve_boundary_optimality(const BoundaryFollowerProblem& problem,
                                             const PicardOptions& options = {});

struct BoundaryObjective {
    double value = 0.0;
    Vector gradient;   // mu u - profile * dp/dnu, entry 0 unused (zero)
};

BoundaryObjective boundary_follower_objective_gradient(const BoundaryFollowerProblem& problem,
                                                       const Vector& u);

struct BoundaryFollowerSolution {
    Vector u_hat;
    SpaceTimeField z;
    SpaceTimeField p;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// CG route on u, independent of the Picard iteration.
BoundaryFollowerSolution solve_boundary_follower_cg(const BoundaryFollowerProblem& problem,
                                                    const CgOptions& options = {});

/// Penalised null control with the boundary follower; `problem.leader` is ignored.
LeaderSolution solve_boundary_leader(const BoundaryFollowerProblem& problem, double epsilon,
                                     const LeaderOptions& options = {});

LeaderProblem boundary_leader_problem(const BoundaryFollowerProblem& problem, double epsilon);

/// Columns `t u_value node`.
void write_boundary_series(std::ostream& out, const TimeGrid& time, const Vector& u, int node);

}  // namespace nls
