#include "nls/stackelberg.hpp"

#include "nls/errors.hpp"

#include <cmath>
#include <string>

namespace nls {

namespace {

// Runs x_{k+1} = step(x_k) from x_0 = 0-field until the increments settle.
template <typename Step>
SpaceTimeField picard(const CoupledSystem& system, Step&& step, const PicardOptions& opt,
                      FixedPointTrace& trace, const char* what) {
    const Grid& g = system.grid();
    const TimeGrid& t = system.time();
    SpaceTimeField x(g, t);
    double first = 0.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        SpaceTimeField next = step(x);
        const double inc = control_norm(next - x, g, t);
        const double size = control_norm(next, g, t);
        trace.iterations = it;
        trace.increments.push_back(inc);
        const std::size_t m = trace.increments.size();
        if (m >= 2 && trace.increments[m - 2] > 0.0) {
            trace.contraction = inc / trace.increments[m - 2];
        }
        if (!next.all_finite() || !std::isfinite(inc)) {
            throw NonContractionError(std::string(what) + ": non-finite iterate at iteration " +
                                          std::to_string(it),
                                      trace.contraction);
        }
        if (it == 1) first = inc;
        if (first > 0.0 && inc > opt.blowup * first) {
            throw NonContractionError(std::string(what) + ": increments grew by more than " +
                                          std::to_string(opt.blowup) + " (contraction " +
                                          std::to_string(trace.contraction) + ")",
                                      trace.contraction);
        }
        x = std::move(next);
        if (inc <= opt.tol * (1.0 + size)) return x;
    }
    throw NonContractionError(std::string(what) + ": no convergence in " +
                                  std::to_string(opt.max_iter) + " iterations (contraction " +
                                  std::to_string(trace.contraction) + ")",
                              trace.contraction);
}

Vector boundary_control(const CoupledSystem& system, const ParabolicSolver& model,
                        const SpaceTimeField& p) {
    const auto& ch = std::get<BoundaryChannel>(system.channel);
    const TimeGrid& t = system.time();
    Vector u = Vector::Zero(t.steps() + 1);
    for (int k = 1; k <= t.steps(); ++k) {
        u[k] = ch.profile / system.mu * model.adjoint_normal_derivative(k, ch.side, p.slice(k - 1));
    }
    return u;
}

void add_response(const CoupledSystem& system, const ParabolicSolver& adjoint_model,
                  const SpaceTimeField& p, ForwardProblem& problem) {
    if (const auto* d = std::get_if<DistributedChannel>(&system.channel)) {
        SpaceTimeField v = (-1.0 / system.mu) * align_adjoint(p).masked(d->region);
        if (problem.source) {
            *problem.source += v;
        } else {
            problem.source = std::move(v);
        }
        return;
    }
    const auto& ch = std::get<BoundaryChannel>(system.channel);
    Vector data = ch.profile * boundary_control(system, adjoint_model, p);
    auto& slot = problem.boundary[ch.side == Side::left ? 0 : 1];
    if (slot) {
        *slot += data;
    } else {
        slot = std::move(data);
    }
}

}  // namespace

void CoupledSystem::validate() const {
    if (!state_model || !follower_model) throw ConfigError("coupled system needs both models");
    if (!(state_model->grid() == follower_model->grid()) ||
        !(state_model->time() == follower_model->time())) {
        throw DimensionError("state and follower models use different grids");
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive and finite");
    const int n = grid().nodes();
    if (leader_region.size() != n || target_region.size() != n) {
        throw DimensionError("region masks do not match the grid");
    }
    if (const auto* d = std::get_if<DistributedChannel>(&channel)) {
        if (d->region.size() != n) throw DimensionError("follower region does not match the grid");
        if (leader_region.interval().intersects(d->region.interval())) {
            throw ConfigError("leader region omega and follower region O must be disjoint");
        }
    } else {
        const auto& b = std::get<BoundaryChannel>(channel);
        if (!std::isfinite(b.profile) || b.profile == 0.0) {
            throw ConfigError("boundary profile gamma must be finite and nonzero");
        }
    }
}

void add_follower_response(const CoupledSystem& system, const SpaceTimeField& p,
                           ForwardProblem& problem) {
    add_response(system, *system.follower_model, p, problem);
}

SpaceTimeField distributed_response(const CoupledSystem& system, const SpaceTimeField& p) {
    const auto& d = std::get<DistributedChannel>(system.channel);
    return (-1.0 / system.mu) * align_adjoint(p).masked(d.region);
}

Vector boundary_response(const CoupledSystem& system, const SpaceTimeField& p) {
    return boundary_control(system, *system.follower_model, p);
}

CoupledState solve_coupled(const CoupledSystem& system, const SpaceTimeField& leader,
                           const Vector& initial, const SpaceTimeField& target,
                           const PicardOptions& options) {
    system.validate();
    const Grid& g = system.grid();
    const TimeGrid& t = system.time();
    if (!leader.matches(g, t) || !target.matches(g, t)) {
        throw DimensionError("solve_coupled: leader or target field shape");
    }
    const SpaceTimeField f = leader.masked(system.leader_region);
    CoupledState out;
    SpaceTimeField z;
    auto step = [&](const SpaceTimeField& p) {
        ForwardProblem fp{initial, f, {}};
        add_follower_response(system, p, fp);
        z = system.state_model->forward(fp);
        BackwardProblem bp{Vector::Zero(g.nodes()), (z - target).masked(system.target_region)};
        return system.follower_model->backward(bp);
    };
    out.p = picard(system, step, options, out.trace, "follower optimality system");
    // z belongs to the previous iterate; recompute it from the converged p.
    ForwardProblem fp{initial, f, {}};
    add_follower_response(system, out.p, fp);
    out.z = system.state_model->forward(fp);
    return out;
}

AdjointPair solve_adjoint_pair(const CoupledSystem& system, const Vector& terminal,
                               const PicardOptions& options) {
    system.validate();
    const Grid& g = system.grid();
    if (terminal.size() != g.nodes()) throw DimensionError("solve_adjoint_pair: terminal length");
    AdjointPair out;
    SpaceTimeField psi;
    auto step = [&](const SpaceTimeField& rho) {
        ForwardProblem fp{Vector::Zero(g.nodes()), std::nullopt, {}};
        add_response(system, *system.state_model, rho, fp);
        psi = system.follower_model->forward(fp);
        BackwardProblem bp{terminal, psi.masked(system.target_region)};
        return system.state_model->backward(bp);
    };
    // The first iterate is computed from rho = 0, which gives psi = 0 and the
    // uncoupled backward solve; subsequent iterates add the coupling.
    out.rho = picard(system, step, options, out.trace, "leader adjoint system");
    ForwardProblem fp{Vector::Zero(g.nodes()), std::nullopt, {}};
    add_response(system, *system.state_model, out.rho, fp);
    out.psi = system.follower_model->forward(fp);
    return out;
}

}  // namespace nls
