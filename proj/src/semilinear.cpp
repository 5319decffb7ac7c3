#include "nls/semilinear.hpp"

#include "nls/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nls {

Nonlinearity Nonlinearity::zero() {
    Nonlinearity n;
    n.g = [](double) { return 0.0; };
    n.dg = n.g;
    n.d2g = n.g;
    return n;
}

Nonlinearity Nonlinearity::tanh(double c) {
    Nonlinearity n;
    n.name = "tanh";
    n.amplitude = c;
    n.g = [c](double s) { return c * std::tanh(s); };
    n.dg = [c](double s) {
        const double sech = 1.0 / std::cosh(s);
        return c * sech * sech;
    };
    n.d2g = [c](double s) {
        const double sech = 1.0 / std::cosh(s);
        return -2.0 * c * sech * sech * std::tanh(s);
    };
    n.bound = std::abs(c) * (1.0 + 4.0 / (3.0 * std::sqrt(3.0)));
    return n;
}

Nonlinearity Nonlinearity::clip(double c) {
    Nonlinearity n;
    n.name = "clip";
    n.amplitude = c;
    n.g = [c](double s) { return c * s / std::sqrt(1.0 + s * s); };
    n.dg = [c](double s) { return c * std::pow(1.0 + s * s, -1.5); };
    n.d2g = [c](double s) { return -3.0 * c * s * std::pow(1.0 + s * s, -2.5); };
    // max |G''| = 3 (1/2) (5/4)^{-5/2} c at s = 1/2
    n.bound = std::abs(c) * (1.0 + 1.5 * std::pow(1.25, -2.5));
    return n;
}

Nonlinearity Nonlinearity::linear(double k) {
    Nonlinearity n;
    n.name = "linear";
    n.amplitude = k;
    n.g = [k](double s) { return k * s; };
    n.dg = [k](double) { return k; };
    n.d2g = [](double) { return 0.0; };
    n.bound = std::abs(k);
    return n;
}

Nonlinearity Nonlinearity::from_name(const std::string& name, double amplitude) {
    if (!std::isfinite(amplitude)) throw ConfigError("nonlinearity amplitude must be finite");
    if (name == "zero") return zero();
    if (name == "tanh") return tanh(amplitude);
    if (name == "clip") return clip(amplitude);
    if (name == "linear") return linear(amplitude);
    throw ConfigError("unknown nonlinearity '" + name + "' (expected zero, tanh, clip or linear)");
}

bool check_bound(const Nonlinearity& G, double range, int samples) {
    for (int i = 0; i < samples; ++i) {
        const double s = -range + 2.0 * range * i / (samples - 1);
        const double v = std::abs(G.dg(s)) + std::abs(G.d2g(s));
        if (!std::isfinite(v) || v > G.bound * (1.0 + 1e-12) + 1e-300) return false;
    }
    return true;
}

double mean_derivative(const Nonlinearity& G, double base, double z) {
    using boost::math::quadrature::gauss;
    return gauss<double, 8>::integrate([&](double s) { return G.dg(base + s * z); }, 0.0, 1.0);
}

LinearizationCoeffs linearization_coeffs(const SpaceTimeField& w, const SpaceTimeField& ybar,
                                         const Nonlinearity& G) {
    if (w.time_rows() != ybar.time_rows() || w.nodes() != ybar.nodes()) {
        throw DimensionError("linearization_coeffs: field shapes differ");
    }
    LinearizationCoeffs c{SpaceTimeField(w.time_rows(), w.nodes()),
                          SpaceTimeField(w.time_rows(), w.nodes())};
    for (int k = 0; k < w.time_rows(); ++k) {
        for (int i = 0; i < w.nodes(); ++i) {
            c.a(k, i) = mean_derivative(G, ybar(k, i), w(k, i));
            c.b(k, i) = G.dg(w(k, i) + ybar(k, i));
        }
    }
    return c;
}

SpaceTimeField semilinear_forward(const Grid& grid, const TimeGrid& time,
                                  const std::shared_ptr<const KernelOperator>& kernel,
                                  const Nonlinearity& G, Placement placement,
                                  const Vector& initial,
                                  const std::optional<SpaceTimeField>& source) {
    if (!kernel) throw DimensionError("semilinear_forward needs a kernel operator");
    if (initial.size() != grid.nodes()) throw DimensionError("semilinear_forward: initial length");
    if (source && !source->matches(grid, time)) {
        throw DimensionError("semilinear_forward: source shape");
    }
    const int n = grid.interior();
    const double inv_dt = 1.0 / time.dt();
    Matrix base = -build_laplacian(grid).dense();
    base.diagonal().array() += inv_dt;
    const double g0 = G.g(0.0);

    SpaceTimeField y(grid, time);
    y.set_slice(0, initial);
    for (int k = 1; k <= time.steps(); ++k) {
        const Matrix& Nfull = kernel->matrix(k);
        const Matrix N = Nfull.block(1, 1, n, n);
        Vector rhs = inv_dt * y.row(k - 1).segment(1, n).transpose();
        if (source) rhs += source->row(k).segment(1, n).transpose();
        if (placement == Placement::kernel && g0 != 0.0) {
            rhs -= g0 * (Nfull.col(0).segment(1, n) + Nfull.col(n + 1).segment(1, n));
        }
        Vector u = y.row(k - 1).segment(1, n).transpose();
        bool done = false;
        for (int it = 0; it < 60 && !done; ++it) {
            Vector gu(n), dgu(n);
            for (int i = 0; i < n; ++i) {
                gu[i] = G.g(u[i]);
                dgu[i] = G.dg(u[i]);
            }
            Vector residual;
            Matrix jac;
            if (placement == Placement::reaction) {
                residual = base * u + N * u - gu - rhs;
                jac = base + N;
                jac.diagonal() -= dgu;
            } else {
                residual = base * u + N * gu - rhs;
                jac = base + N * dgu.asDiagonal();
            }
            const Vector delta = jac.partialPivLu().solve(residual);
            u -= delta;
            if (!u.allFinite()) break;
            done = delta.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + u.lpNorm<Eigen::Infinity>());
        }
        if (!done) throw StepError("Newton failed at step " + std::to_string(k), k);
        y.row(k).segment(1, n) = u.transpose();
    }
    return y;
}

void SemilinearProblem::validate() const {
    if (!kernel || !(kernel->grid() == grid) || !(kernel->time() == time)) {
        throw DimensionError("semilinear problem: kernel does not match the grids");
    }
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!std::isfinite(nonlinearity.bound)) throw ConfigError("nonlinearity bound must be finite");
    if (initial.size() != grid.nodes()) throw DimensionError("semilinear problem: initial length");
    if (!target.matches(grid, time) || !reference.matches(grid, time)) {
        throw DimensionError("semilinear problem: target or reference shape");
    }
}

SemilinearProblem reduce_semilinear(SemilinearProblem base, const Vector& y0, const Vector& ybar0,
                                    const SpaceTimeField& y_d) {
    if (y0.size() != ybar0.size()) throw DimensionError("reduce_semilinear: initial lengths differ");
    base.reference = semilinear_forward(base.grid, base.time, base.kernel, base.nonlinearity,
                                        base.placement, ybar0);
    base.initial = y0 - ybar0;
    base.target = y_d - base.reference;
    return base;
}

CoupledSystem linearized_system(const SemilinearProblem& problem, const SpaceTimeField& w) {
    Dynamics state{problem.grid, problem.time, problem.kernel, std::nullopt, std::nullopt};
    Dynamics follower = state;
    if (!(problem.placement == Placement::reaction && problem.nonlinearity.is_zero())) {
        LinearizationCoeffs c = linearization_coeffs(w, problem.reference, problem.nonlinearity);
        if (problem.placement == Placement::reaction) {
            state.reaction = -1.0 * c.a;
            follower.reaction = -1.0 * c.b;
        } else {
            state.kernel_scale = std::move(c.a);
            follower.kernel_scale = std::move(c.b);
        }
    }
    auto s = std::make_shared<const ParabolicSolver>(std::move(state));
    std::shared_ptr<const ParabolicSolver> f =
        follower.reaction || follower.kernel_scale
            ? std::make_shared<const ParabolicSolver>(std::move(follower))
            : s;
    return CoupledSystem{s, f, problem.channel, problem.leader_region, problem.target_region,
                         problem.mu};
}

SemilinearRun solve_semilinear_stackelberg(const SemilinearProblem& problem,
                                           const SemilinearOptions& options) {
    problem.validate();
    const Grid& g = problem.grid;
    const TimeGrid& t = problem.time;
    const bool frozen = problem.placement == Placement::reaction && problem.nonlinearity.is_zero();

    SemilinearRun run;
    SpaceTimeField w(g, t);
    run.history.push_back(w);
    std::optional<SpaceTimeField> warm;
    for (int it = 1; it <= options.max_outer; ++it) {
        if (!frozen) {
            const LinearizationCoeffs c = linearization_coeffs(w, problem.reference,
                                                               problem.nonlinearity);
            run.max_coefficient = std::max({run.max_coefficient, c.a.max_abs(), c.b.max_abs()});
        }
        const CoupledSystem sys = linearized_system(problem, w);
        const LeaderProblem lp{sys, problem.initial, problem.target, problem.epsilon,
                               problem.reference};
        run.final = solve_leader_cg(lp, options.leader, warm ? &*warm : nullptr);
        warm = run.final.f_hat;

        const double increment = control_norm(run.final.z - w, g, t);
        const double size = control_norm(w, g, t);
        SemilinearIterate rec{it, increment, run.final.terminal_norm, 0.0};
        if (run.trace.size() >= 1 && run.trace.back().increment > 0.0) {
            rec.contraction = increment / run.trace.back().increment;
        }
        run.trace.push_back(rec);
        w = run.final.z;
        run.history.push_back(w);
        run.terminal_norm = run.final.terminal_norm;
        if (frozen || increment <= options.tol * (1.0 + size)) {
            run.converged = run.final.converged;
            break;
        }
    }
    return run;
}

void write_semilinear_trace(std::ostream& out, const SemilinearRun& run) {
    out << "# iter increment_norm terminal_norm contraction\n";
    const auto old = out.precision(10);
    for (const SemilinearIterate& r : run.trace) {
        out << r.iteration << ' ' << std::scientific << r.increment << ' ' << r.terminal_norm << ' '
            << r.contraction << std::defaultfloat << '\n';
    }
    out.precision(old);
}

namespace {

SpaceTimeField derivative_field(const SpaceTimeField& y, const std::function<double(double)>& fn) {
    SpaceTimeField out(y.time_rows(), y.nodes());
    for (int k = 0; k < y.time_rows(); ++k) {
        for (int i = 0; i < y.nodes(); ++i) out(k, i) = fn(y(k, i));
    }
    return out;
}

ParabolicSolver linearized_solver(const SemilinearFollowerProblem& pr, const SpaceTimeField& y) {
    return ParabolicSolver(Dynamics{pr.grid, pr.time, pr.kernel,
                                    -1.0 * derivative_field(y, pr.nonlinearity.dg), std::nullopt});
}

SpaceTimeField semilinear_state(const SemilinearFollowerProblem& pr, const SpaceTimeField& v) {
    return semilinear_forward(pr.grid, pr.time, pr.kernel, pr.nonlinearity, Placement::reaction,
                              pr.initial,
                              pr.leader.masked(pr.leader_region) + v.masked(pr.follower_region));
}

}  // namespace

SemilinearFollowerState semilinear_follower_state(const SemilinearFollowerProblem& problem,
                                                  const SpaceTimeField& v) {
    SemilinearFollowerState s;
    s.y = semilinear_state(problem, v);
    const ParabolicSolver adj = linearized_solver(problem, s.y);
    s.p = adj.backward({Vector::Zero(problem.grid.nodes()),
                        (s.y - problem.target).masked(problem.target_region)});
    return s;
}

double semilinear_follower_objective(const SemilinearFollowerProblem& problem,
                                     const SpaceTimeField& v) {
    const SpaceTimeField y = semilinear_state(problem, v);
    const double track =
        control_norm(y - problem.target, problem.grid, problem.time, &problem.target_region);
    const double effort = control_norm(v, problem.grid, problem.time, &problem.follower_region);
    return 0.5 * track * track + 0.5 * problem.mu * effort * effort;
}

SpaceTimeField semilinear_follower_gradient(const SemilinearFollowerProblem& problem,
                                            const SpaceTimeField& v) {
    const SemilinearFollowerState s = semilinear_follower_state(problem, v);
    return (problem.mu * v + align_adjoint(s.p)).masked(problem.follower_region);
}

SpaceTimeField solve_semilinear_follower(const SemilinearFollowerProblem& problem,
                                         const PicardOptions& options) {
    const Grid& g = problem.grid;
    const TimeGrid& t = problem.time;
    SpaceTimeField v(g, t);
    double first = 0.0, last = 0.0;
    for (int it = 1; it <= options.max_iter; ++it) {
        const SemilinearFollowerState s = semilinear_follower_state(problem, v);
        const SpaceTimeField next = (-1.0 / problem.mu) * align_adjoint(s.p).masked(problem.follower_region);
        const double inc = control_norm(next - v, g, t);
        const double contraction = last > 0.0 ? inc / last : 0.0;
        if (it == 1) first = inc;
        if (!std::isfinite(inc) || (first > 0.0 && inc > options.blowup * first)) {
            throw NonContractionError("semilinear follower iteration diverged", contraction);
        }
        v = next;
        last = inc;
        if (inc <= options.tol * (1.0 + control_norm(v, g, t))) return v;
    }
    throw NonContractionError("semilinear follower iteration did not converge", 1.0);
}

double hessian_bilinear_form(const SemilinearFollowerProblem& problem, const SpaceTimeField& v,
                             const SpaceTimeField& w1, const SpaceTimeField& w2) {
    const Grid& g = problem.grid;
    const TimeGrid& t = problem.time;
    const RegionMask& O = problem.follower_region;
    const SemilinearFollowerState s = semilinear_follower_state(problem, v);
    const ParabolicSolver lin = linearized_solver(problem, s.y);
    const SpaceTimeField phi = lin.forward({Vector::Zero(g.nodes()), w1.masked(O), {}});

    // Row k of the source pairs G''(y^k) phi^k with p^{k-1}.
    const SpaceTimeField d2 = derivative_field(s.y, problem.nonlinearity.d2g);
    const SpaceTimeField pa = align_adjoint(s.p);
    SpaceTimeField src(g, t);
    src.values() = d2.values().cwiseProduct(phi.values()).cwiseProduct(pa.values());
    src += phi.masked(problem.target_region);
    const SpaceTimeField eta = lin.backward({Vector::Zero(g.nodes()), src});
    return control_dot(align_adjoint(eta), w2, g, t, &O) +
           problem.mu * control_dot(w1, w2, g, t, &O);
}

double hessian_quadratic_form(const SemilinearFollowerProblem& problem, const SpaceTimeField& v,
                              const SpaceTimeField& w1) {
    return hessian_bilinear_form(problem, v, w1, w1);
}

}  // namespace nls
