#include "nls/leader.hpp"

#include "nls/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nls {

namespace {

PicardOptions inner(const LeaderOptions& o) {
    PicardOptions p;
    p.tol = std::max(o.inner_factor * o.tol, 1e-15);
    p.max_iter = o.inner_max_iter;
    return p;
}

struct Evaluation {
    CoupledState state;
    AdjointPair adjoint;
};

Evaluation evaluate(const LeaderProblem& problem, const SpaceTimeField& f, const Vector& initial,
                    const SpaceTimeField& target, const LeaderOptions& options) {
    const PicardOptions po = inner(options);
    Evaluation e;
    e.state = solve_coupled(problem.system, f, initial, target, po);
    const Vector terminal = (-1.0 / problem.epsilon) * e.state.z.slice(problem.time().steps());
    e.adjoint = solve_adjoint_pair(problem.system, terminal, po);
    return e;
}

double terminal_norm(const LeaderProblem& problem, const SpaceTimeField& z) {
    return space_norm(z.slice(problem.time().steps()), problem.grid());
}

}  // namespace

void LeaderProblem::validate() const {
    system.validate();
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
    if (initial.size() != grid().nodes()) throw DimensionError("leader problem: initial length");
    if (!target.matches(grid(), time())) throw DimensionError("leader problem: target shape");
    if (!system.leader_region.interval().intersects(system.target_region.interval())) {
        throw ConfigError("leader region omega must intersect the target region O_d");
    }
}

LeaderProblem reduce_to_null(const CoupledSystem& system, const Vector& y0, const Vector& ybar0,
                             const SpaceTimeField& y_d, double epsilon) {
    system.validate();
    if (y0.size() != ybar0.size()) throw DimensionError("reduce_to_null: initial lengths differ");
    ForwardProblem fp{ybar0, std::nullopt, {}};
    const SpaceTimeField ybar = system.state_model->forward(fp);
    LeaderProblem out{system, y0 - ybar0, y_d - ybar, epsilon, ybar};
    return out;
}

double leader_objective(const LeaderProblem& problem, const SpaceTimeField& f,
                        const LeaderOptions& options) {
    problem.validate();
    const CoupledState s =
        solve_coupled(problem.system, f, problem.initial, problem.target, inner(options));
    const double zt = terminal_norm(problem, s.z);
    const double fn = control_norm(f, problem.grid(), problem.time(), &problem.system.leader_region);
    return 0.5 * fn * fn + 0.5 / problem.epsilon * zt * zt;
}

SpaceTimeField leader_gradient(const LeaderProblem& problem, const SpaceTimeField& f,
                               const LeaderOptions& options) {
    problem.validate();
    const Evaluation e = evaluate(problem, f, problem.initial, problem.target, options);
    return (f - align_adjoint(e.adjoint.rho)).masked(problem.system.leader_region);
}

LeaderSolution solve_leader_cg(const LeaderProblem& problem, const LeaderOptions& options,
                               const SpaceTimeField* warm_start) {
    problem.validate();
    const Grid& g = problem.grid();
    const TimeGrid& t = problem.time();
    const RegionMask& w = problem.system.leader_region;
    const SpaceTimeField zero(g, t);
    const Vector zero0 = Vector::Zero(g.nodes());

    // grad J(f) = H f - b with b = rho_0 on omega (data only) and
    // H d = d - rho_lin(d) on omega (zero data).
    const Evaluation e0 = evaluate(problem, zero, problem.initial, problem.target, options);
    const SpaceTimeField b = align_adjoint(e0.adjoint.rho).masked(w);
    auto hessian = [&](const SpaceTimeField& d) {
        const Evaluation e = evaluate(problem, d.masked(w), zero0, zero, options);
        return (d - align_adjoint(e.adjoint.rho)).masked(w);
    };
    auto dot = [&](const SpaceTimeField& a, const SpaceTimeField& c) {
        return control_dot(a, c, g, t, &w);
    };
    CgOptions co{options.tol, options.max_iter, true};
    const SpaceTimeField start = warm_start ? warm_start->masked(w) : zero;
    const auto cg = conjugate_gradient(hessian, b, start, dot, co);

    LeaderSolution out;
    out.f_hat = cg.x.masked(w);
    const Evaluation e = evaluate(problem, out.f_hat, problem.initial, problem.target, options);
    out.z = e.state.z;
    out.p = e.state.p;
    out.rho = e.adjoint.rho;
    out.psi = e.adjoint.psi;
    out.terminal_norm = terminal_norm(problem, out.z);
    out.control_norm = control_norm(out.f_hat, g, t, &w);
    out.objective = 0.5 * out.control_norm * out.control_norm +
                    0.5 / problem.epsilon * out.terminal_norm * out.terminal_norm;
    out.characterization = control_norm(out.f_hat - align_adjoint(out.rho), g, t, &w);
    out.cg_iterations = cg.iterations;
    out.converged = cg.converged;
    out.stagnated = cg.stagnated;
    out.cg_history = cg.history;
    out.duality_gap = duality_identity_check(out, problem);
    return out;
}

double duality_identity_check(const LeaderSolution& s, const LeaderProblem& problem) {
    const Grid& g = problem.grid();
    const TimeGrid& t = problem.time();
    const double lhs = s.control_norm * s.control_norm +
                       s.terminal_norm * s.terminal_norm / problem.epsilon;
    const double rhs = -space_dot(problem.initial, s.rho.slice(0), g) +
                       control_dot(problem.target, s.psi, g, t, &problem.system.target_region);
    return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

SweepReport epsilon_sweep(const LeaderProblem& problem, const std::vector<double>& eps_list,
                          const LeaderOptions& options) {
    SweepReport rep;
    std::optional<SpaceTimeField> warm;
    for (double eps : eps_list) {
        LeaderProblem p = problem;
        p.epsilon = eps;
        try {
            const LeaderSolution s = solve_leader_cg(p, options, warm ? &*warm : nullptr);
            rep.rows.push_back({eps, s.terminal_norm, s.control_norm, s.cg_iterations,
                                s.duality_gap, s.converged});
            warm = s.f_hat;
            if (!s.converged) {
                rep.aborted = true;
                rep.abort_reason = "CG did not converge at epsilon " + std::to_string(eps);
                break;
            }
        } catch (const Error& err) {
            rep.aborted = true;
            rep.abort_reason = err.what();
            break;
        }
    }
    std::vector<double> e, z;
    double fmin = 0.0, fmax = 0.0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const SweepRow& r = rep.rows[i];
        e.push_back(r.epsilon);
        z.push_back(r.terminal_norm);
        if (i == 0) {
            fmin = fmax = r.control_norm;
        } else {
            const SweepRow& q = rep.rows[i - 1];
            const bool decreasing_eps = r.epsilon < q.epsilon;
            // Smaller eps must not increase the terminal norm nor shrink the control.
            if (decreasing_eps && r.terminal_norm > q.terminal_norm * (1 + 1e-10)) {
                rep.terminal_monotone = false;
            }
            if (decreasing_eps && r.control_norm < q.control_norm * (1 - 1e-10)) {
                rep.control_monotone = false;
            }
            fmin = std::min(fmin, r.control_norm);
            fmax = std::max(fmax, r.control_norm);
        }
    }
    rep.slope = loglog_slope(e, z);
    if (fmin > 0.0) rep.control_ratio = fmax / fmin;
    return rep;
}

void write_sweep(std::ostream& out, const SweepReport& report) {
    out << "# epsilon terminal_norm control_norm cg_iters duality_gap\n";
    const auto old = out.precision(10);
    for (const SweepRow& r : report.rows) {
        out << std::scientific << r.epsilon << ' ' << r.terminal_norm << ' ' << r.control_norm
            << ' ' << r.cg_iterations << ' ' << r.duality_gap << '\n';
    }
    out << std::defaultfloat;
    out.precision(old);
}

}  // namespace nls
