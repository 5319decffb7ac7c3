#include "nls/follower.hpp"

#include "nls/errors.hpp"

namespace nls {

void FollowerProblem::validate() const {
    if (!solver) throw ConfigError("follower problem needs a solver");
    system().validate();
    if (!leader.matches(grid(), time()) || !target.matches(grid(), time())) {
        throw DimensionError("follower problem: leader or target field shape");
    }
    if (initial.size() != grid().nodes()) throw DimensionError("follower problem: initial length");
}

CoupledSystem FollowerProblem::system() const {
    return CoupledSystem{solver, solver, DistributedChannel{follower_region}, leader_region,
                         target_region, mu};
}

SpaceTimeField follower_state(const FollowerProblem& problem, const SpaceTimeField& v) {
    problem.validate();
    ForwardProblem fp{problem.initial,
                      problem.leader.masked(problem.leader_region) +
                          v.masked(problem.follower_region),
                      {}};
    return problem.solver->forward(fp);
}

double follower_objective(const FollowerProblem& problem, const SpaceTimeField& v) {
    const SpaceTimeField z = follower_state(problem, v);
    const Grid& g = problem.grid();
    const TimeGrid& t = problem.time();
    const double track = control_norm(z - problem.target, g, t, &problem.target_region);
    const double effort = control_norm(v, g, t, &problem.follower_region);
    return 0.5 * track * track + 0.5 * problem.mu * effort * effort;
}

namespace {

SpaceTimeField adjoint_of(const FollowerProblem& problem, const SpaceTimeField& z,
                          const SpaceTimeField& target) {
    BackwardProblem bp{Vector::Zero(problem.grid().nodes()),
                       (z - target).masked(problem.target_region)};
    return problem.solver->backward(bp);
}

}  // namespace

SpaceTimeField follower_gradient(const FollowerProblem& problem, const SpaceTimeField& v) {
    const SpaceTimeField z = follower_state(problem, v);
    const SpaceTimeField p = adjoint_of(problem, z, problem.target);
    return (problem.mu * v + align_adjoint(p)).masked(problem.follower_region);
}

FollowerSolution solve_follower_cg(const FollowerProblem& problem, const CgOptions& options) {
    problem.validate();
    const Grid& g = problem.grid();
    const TimeGrid& t = problem.time();
    const RegionMask& O = problem.follower_region;
    const SpaceTimeField zero(g, t);

    // J is quadratic: grad J(v) = H v - b with b = -grad J(0).
    const SpaceTimeField b = -1.0 * follower_gradient(problem, zero);
    auto hessian = [&](const SpaceTimeField& d) {
        ForwardProblem fp{Vector::Zero(g.nodes()), d.masked(O), {}};
        const SpaceTimeField dz = problem.solver->forward(fp);
        const SpaceTimeField dp = adjoint_of(problem, dz, zero);
        return (problem.mu * d + align_adjoint(dp)).masked(O);
    };
    auto dot = [&](const SpaceTimeField& a, const SpaceTimeField& c) {
        return control_dot(a, c, g, t, &O);
    };
    const auto cg = conjugate_gradient(hessian, b, zero, dot, options);

    FollowerSolution out;
    out.v_hat = cg.x.masked(O);
    out.z = follower_state(problem, out.v_hat);
    out.p = adjoint_of(problem, out.z, problem.target);
    out.residual = control_norm(problem.mu * out.v_hat + align_adjoint(out.p), g, t, &O);
    out.objective = follower_objective(problem, out.v_hat);
    out.iterations = cg.iterations;
    out.converged = cg.converged;
    return out;
}

CoupledState solve_optimality_system(const FollowerProblem& problem, const PicardOptions& options) {
    problem.validate();
    return solve_coupled(problem.system(), problem.leader, problem.initial, problem.target, options);
}

std::optional<double> estimate_control_bound(const FollowerProblem& problem,
                                             const CgOptions& options) {
    const Grid& g = problem.grid();
    const TimeGrid& t = problem.time();
    const double denom = control_norm(problem.leader, g, t, &problem.leader_region) +
                         space_norm(problem.initial, g);
    if (!(denom > 0.0)) return std::nullopt;
    const FollowerSolution s = solve_follower_cg(problem, options);
    return control_norm(s.v_hat, g, t, &problem.follower_region) / denom;
}

}  // namespace nls
