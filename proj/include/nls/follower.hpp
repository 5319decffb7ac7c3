#pragma once

#include "nls/cg.hpp"
#include "nls/grid.hpp"
#include "nls/parabolic.hpp"
#include "nls/stackelberg.hpp"

#include <memory>
#include <optional>

namespace nls {

/// Distributed follower problem for a fixed leader control f:
///   min_v  1/2 |z - z_d|^2_{O_d} + mu/2 |v|^2_O,
///   z forward from z0 with source f chi_omega + v chi_O.
struct FollowerProblem {
    std::shared_ptr<const ParabolicSolver> solver;
    RegionMask leader_region;
    RegionMask follower_region;
    RegionMask target_region;
    double mu = 100.0;
    SpaceTimeField leader;   // f, masked to omega on use
    SpaceTimeField target;   // z_d, masked to O_d on use
    Vector initial;          // z0

    const Grid& grid() const { return solver->grid(); }
    const TimeGrid& time() const { return solver->time(); }

    void validate() const;
    CoupledSystem system() const;
};

struct FollowerSolution {
    SpaceTimeField v_hat;
    SpaceTimeField z;
    SpaceTimeField p;      // raw backward field
    double objective = 0.0;
    double residual = 0.0; // |mu v + p|_O with p aligned to the sources
    int iterations = 0;
    bool converged = false;
};

SpaceTimeField follower_state(const FollowerProblem& problem, const SpaceTimeField& v);
double follower_objective(const FollowerProblem& problem, const SpaceTimeField& v);

/// mu v + p on O, p = backward(0, (z - z_d) chi_Od).
SpaceTimeField follower_gradient(const FollowerProblem& problem, const SpaceTimeField& v);

FollowerSolution solve_follower_cg(const FollowerProblem& problem, const CgOptions& options = {});

/// Picard route through the coupled system; returns (z, p) and the trace.
CoupledState solve_optimality_system(const FollowerProblem& problem,
                                     const PicardOptions& options = {});

/// |v_hat|_O / (|f|_omega + |z0|); nullopt when the denominator vanishes.
std::optional<double> estimate_control_bound(const FollowerProblem& problem,
                                             const CgOptions& options = {});

}  // namespace nls
