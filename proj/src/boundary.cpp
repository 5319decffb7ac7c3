#include "nls/boundary.hpp"

#include "nls/errors.hpp"

#include <cmath>
#include <ostream>

namespace nls {

namespace {

int slot(Side side) { return side == Side::left ? 0 : 1; }

Vector trace_of(const BoundaryFollowerProblem& problem, const SpaceTimeField& p) {
    const TimeGrid& t = problem.time();
    Vector d = Vector::Zero(t.steps() + 1);
    for (int k = 1; k <= t.steps(); ++k) {
        d[k] = problem.solver->adjoint_normal_derivative(k, problem.side, p.slice(k - 1));
    }
    return d;
}

SpaceTimeField adjoint_of(const BoundaryFollowerProblem& problem, const SpaceTimeField& z,
                          const SpaceTimeField& target) {
    BackwardProblem bp{Vector::Zero(problem.grid().nodes()),
                       (z - target).masked(problem.target_region)};
    return problem.solver->backward(bp);
}

SpaceTimeField forward_with(const BoundaryFollowerProblem& problem, const Vector& initial,
                            const std::optional<SpaceTimeField>& source, const Vector& u) {
    ForwardProblem fp{initial, source, {}};
    fp.boundary[slot(problem.side)] = problem.profile * u;
    return problem.solver->forward(fp);
}

}  // namespace

void BoundaryFollowerProblem::validate() const {
    if (!solver) throw ConfigError("boundary follower problem needs a solver");
    system().validate();
    if (!leader.matches(grid(), time()) || !target.matches(grid(), time())) {
        throw DimensionError("boundary follower problem: leader or target field shape");
    }
    if (initial.size() != grid().nodes()) {
        throw DimensionError("boundary follower problem: initial length");
    }
}

CoupledSystem BoundaryFollowerProblem::system() const {
    return CoupledSystem{solver, solver, BoundaryChannel{side, profile}, leader_region,
                         target_region, mu};
}

double series_dot(const Vector& a, const Vector& b, const TimeGrid& time) {
    if (a.size() != time.steps() + 1 || b.size() != time.steps() + 1) {
        throw DimensionError("series_dot: series length");
    }
    return time.dt() * a.tail(time.steps()).dot(b.tail(time.steps()));
}

SpaceTimeField boundary_state(const BoundaryFollowerProblem& problem, const Vector& u) {
    problem.validate();
    if (u.size() != problem.time().steps() + 1) throw DimensionError("boundary control length");
    Vector data = u;
    data[0] = 0.0;
    return forward_with(problem, problem.initial, problem.leader.masked(problem.leader_region),
                        data);
}

BoundaryOptimality solve_boundary_optimality(const BoundaryFollowerProblem& problem,
                                             const PicardOptions& options) {
    problem.validate();
    const CoupledSystem sys = problem.system();
    CoupledState s = solve_coupled(sys, problem.leader, problem.initial, problem.target, options);
    BoundaryOptimality out;
    out.u_hat = boundary_response(sys, s.p);
    out.z = std::move(s.z);
    out.p = std::move(s.p);
    out.trace = std::move(s.trace);
    return out;
}

BoundaryObjective boundary_follower_objective_gradient(const BoundaryFollowerProblem& problem,
                                                       const Vector& u) {
    const SpaceTimeField z = boundary_state(problem, u);
    const SpaceTimeField p = adjoint_of(problem, z, problem.target);
    const Grid& g = problem.grid();
    const TimeGrid& t = problem.time();
    const double track = control_norm(z - problem.target, g, t, &problem.target_region);
    BoundaryObjective out;
    out.value = 0.5 * track * track + 0.5 * problem.mu * series_dot(u, u, t);
    out.gradient = problem.mu * u - problem.profile * trace_of(problem, p);
    out.gradient[0] = 0.0;
    return out;
}

BoundaryFollowerSolution solve_boundary_follower_cg(const BoundaryFollowerProblem& problem,
                                                    const CgOptions& options) {
    problem.validate();
    const Grid& g = problem.grid();
    const TimeGrid& t = problem.time();
    const Vector zero = Vector::Zero(t.steps() + 1);
    const SpaceTimeField zero_field(g, t);

    const Vector b = -boundary_follower_objective_gradient(problem, zero).gradient;
    auto hessian = [&](const Vector& d) {
        Vector dd = d;
        dd[0] = 0.0;
        const SpaceTimeField dz = forward_with(problem, Vector::Zero(g.nodes()), std::nullopt, dd);
        const SpaceTimeField dp = adjoint_of(problem, dz, zero_field);
        Vector out = problem.mu * dd - problem.profile * trace_of(problem, dp);
        out[0] = 0.0;
        return out;
    };
    auto dot = [&](const Vector& a, const Vector& c) { return series_dot(a, c, t); };
    const auto cg = conjugate_gradient(hessian, b, zero, dot, options);

    BoundaryFollowerSolution out;
    out.u_hat = cg.x;
    out.u_hat[0] = 0.0;
    out.z = boundary_state(problem, out.u_hat);
    out.p = adjoint_of(problem, out.z, problem.target);
    out.objective = boundary_follower_objective_gradient(problem, out.u_hat).value;
    out.iterations = cg.iterations;
    out.converged = cg.converged;
    return out;
}

LeaderProblem boundary_leader_problem(const BoundaryFollowerProblem& problem, double epsilon) {
    problem.validate();
    return LeaderProblem{problem.system(), problem.initial, problem.target, epsilon, std::nullopt};
}

LeaderSolution solve_boundary_leader(const BoundaryFollowerProblem& problem, double epsilon,
                                     const LeaderOptions& options) {
    return solve_leader_cg(boundary_leader_problem(problem, epsilon), options);
}

void write_boundary_series(std::ostream& out, const TimeGrid& time, const Vector& u, int node) {
    if (u.size() != time.steps() + 1) throw DimensionError("write_boundary_series: length");
    out << "# t u_value node\n";
    const auto old = out.precision(12);
    for (int k = 0; k <= time.steps(); ++k) {
        out << time.t(k) << ' ' << u[k] << ' ' << node << '\n';
    }
    out.precision(old);
}

}  // namespace nls
