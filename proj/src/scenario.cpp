#include "nls/scenario.hpp"

#include "nls/boundary.hpp"
#include "nls/errors.hpp"
#include "nls/follower.hpp"
#include "nls/kernel.hpp"
#include "nls/leader.hpp"
#include "nls/observability.hpp"
#include "nls/semilinear.hpp"
#include "nls/weights.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nls {

namespace {

namespace fs = std::filesystem;

std::string sci(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

class Report {
public:
    void line(const std::string& key, const std::string& value) { out_ << key << ": " << value << '\n'; }
    void value(const std::string& key, double v) { line(key, sci(v)); }
    void count(const std::string& key, long v) { line(key, std::to_string(v)); }
    void flag(const std::string& key, bool v) { line(key, v ? "yes" : "no"); }
    /// A named check with its tolerance: `check <name>: value (tol t) PASS|FAIL`.
    bool check(const std::string& name, double v, double tol) {
        const bool ok = std::isfinite(v) && v <= tol;
        out_ << "check " << name << ": " << sci(v) << " (tol " << sci(tol) << ") "
             << (ok ? "PASS" : "FAIL") << '\n';
        return ok;
    }
    void band(const std::string& name, double v, double lo, double hi) {
        const bool ok = v >= lo && v <= hi;
        out_ << "check " << name << ": " << sci(v) << " (band [" << lo << ", " << hi << "]) "
             << (ok ? "PASS" : "FAIL") << '\n';
    }
    void blank() { out_ << '\n'; }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

struct Setup {
    Grid grid;
    TimeGrid time;
    KernelSpec spec;
    std::shared_ptr<const KernelOperator> kernel;
    std::shared_ptr<const ParabolicSolver> solver;
    RegionMask omega;
    RegionMask target;
    std::optional<RegionMask> follower;
    CarlemanWeights weights;
};

KernelSpec kernel_spec(const ScenarioConfig& c, const Grid& grid, const TimeGrid& time) {
    if (c.kernel_type == "separable") return KernelSpec::eigen(c.kernel_amplitude, c.kernel_mode, c.length);
    if (c.kernel_type == "gaussian_decay") {
        return KernelSpec(GaussianDecayKernel{c.kernel_amplitude, c.kernel_width, c.kernel_decay});
    }
    if (c.kernel_type == "tabulated") {
        fs::path p(c.kernel_file);
        if (p.is_relative() && !c.base_dir.empty()) p = fs::path(c.base_dir) / p;
        return KernelSpec(load_tabulated_kernel(p.string(), grid, time));
    }
    return KernelSpec(ZeroKernel{});
}

CarlemanWeights make_weights(const ScenarioConfig& c, const Grid& grid) {
    const Vector shape = build_eta0(grid, c.omega_prime_or_default());
    const Vector eta0 = (c.eta0_max / shape.maxCoeff()) * shape;
    return CarlemanWeights(grid, eta0, LProfile(c.horizon), c.s, c.lambda);
}

Setup make_setup(const ScenarioConfig& c) {
    const Grid grid(c.length, c.n);
    const TimeGrid time(c.horizon, c.n_steps);
    KernelSpec spec = kernel_spec(c, grid, time);
    auto kernel = assemble(spec, grid, time);
    auto solver = std::make_shared<const ParabolicSolver>(Dynamics{grid, time, kernel, {}, {}});
    std::optional<RegionMask> follower;
    if (c.follower) follower = RegionMask("O", *c.follower, grid);
    return Setup{grid,
                 time,
                 std::move(spec),
                 kernel,
                 solver,
                 RegionMask("omega", c.omega, grid),
                 RegionMask("O_d", c.target_region, grid),
                 follower,
                 make_weights(c, grid)};
}

SpaceTimeField broadcast(const Vector& v, const Grid& grid, const TimeGrid& time) {
    SpaceTimeField f(grid, time);
    for (int k = 0; k <= time.steps(); ++k) f.set_slice(k, v);
    return f;
}

CoupledSystem coupled(const ScenarioConfig& c, const Setup& s) {
    FollowerChannel ch = c.channel == ChannelKind::distributed
                             ? FollowerChannel(DistributedChannel{*s.follower})
                             : FollowerChannel(BoundaryChannel{c.gamma_side, c.gamma_profile});
    return CoupledSystem{s.solver, s.solver, ch, s.omega, s.target, c.mu};
}

LeaderOptions leader_options(const ScenarioConfig& c) {
    LeaderOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    return o;
}

LeaderProblem leader_problem(const ScenarioConfig& c, const Setup& s, double eps) {
    const Vector y0 = generate(c.initial, s.grid, c.base_dir);
    const Vector ybar0 = generate(c.initial_reference, s.grid, c.base_dir);
    const SpaceTimeField y_d = broadcast(generate(c.target, s.grid, c.base_dir), s.grid, s.time);
    return reduce_to_null(coupled(c, s), y0, ybar0, y_d, eps);
}

void write_file(const fs::path& dir, const std::string& name, const std::string& body,
                ScenarioOutcome& out) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    f << body;
    out.files.push_back(name);
}

std::string field_table(const Grid& grid, const TimeGrid& time, const std::string& header,
                        const std::vector<const SpaceTimeField*>& fields) {
    std::ostringstream out;
    out << "# t x " << header << '\n';
    out.precision(10);
    for (int k = 0; k <= time.steps(); ++k) {
        for (int i = 0; i < grid.nodes(); ++i) {
            out << time.t(k) << ' ' << grid.x(i);
            for (const auto* f : fields) out << ' ' << (*f)(k, i);
            out << '\n';
        }
    }
    return out.str();
}

void header(Report& r, const ScenarioConfig& c, const Setup& s) {
    r.line("experiment", to_string(c.kind));
    r.line("follower channel", to_string(c.channel));
    r.line("grid", "n = " + std::to_string(c.n) + ", n_steps = " + std::to_string(c.n_steps) +
                       ", L = " + sci(c.length) + ", T = " + sci(c.horizon));
    r.line("kernel", s.spec.kind());
    r.value("mu", c.mu);
}

void weights_section(Report& r, const ScenarioConfig& c, const Setup& s, const SpaceTimeField& z_d) {
    const Admissibility adm = admissibility_constant(s.spec, s.weights, s.grid, s.time);
    r.value("kernel admissibility log K", adm.log_value);
    r.flag("kernel admissibility diverging under refinement", adm.diverging);
    r.value("critical s (sigma^- / (sigma^+ - sigma^-))", s.weights.critical_s());
    const ObservabilityWeight w = c.channel == ChannelKind::distributed ? ObservabilityWeight::varpi1
                                                                         : ObservabilityWeight::varpi2;
    const WeightedNorm wn = weighted_target_norm(z_d, s.weights, s.time, w, s.target);
    r.value("log weighted target norm (reported, not enforced)", wn.log_value);
}

template <typename F>
ScenarioOutcome guarded(const ScenarioConfig& c, const std::string& out_dir, F&& body) {
    ScenarioOutcome out;
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    Report r;
    try {
        out.exit_code = body(r, dir, out);
    } catch (const NonContractionError& e) {
        r.line("error", e.what());
        r.value("contraction factor", e.contraction());
        r.line("advice", "increase control.mu");
        out.exit_code = kExitNonConvergence;
    } catch (const StepError& e) {
        r.line("error", e.what());
        out.exit_code = kExitNonConvergence;
    } catch (const ConfigError&) {
        throw;
    } catch (const DimensionError& e) {
        throw ConfigError(e.what());
    }
    r.line("exit code", std::to_string(out.exit_code));
    out.report = r.str();
    (void)c;
    write_file(dir, "report.txt", out.report, out);
    return out;
}

int run_follower(const ScenarioConfig& c, Report& r, const fs::path& dir, ScenarioOutcome& out) {
    const Setup s = make_setup(c);
    header(r, c, s);
    FollowerProblem p{s.solver,
                      s.omega,
                      *s.follower,
                      s.target,
                      c.mu,
                      broadcast(generate(c.leader, s.grid, c.base_dir), s.grid, s.time),
                      broadcast(generate(c.target, s.grid, c.base_dir), s.grid, s.time),
                      generate(c.initial, s.grid, c.base_dir)};
    const FollowerSolution cg = solve_follower_cg(p, {c.tol, c.max_iter});
    r.value("J", cg.objective);
    r.count("cg iterations", cg.iterations);
    r.flag("cg converged", cg.converged);
    const double vnorm = control_norm(cg.v_hat, s.grid, s.time, &*s.follower);
    r.value("|v_hat|_O", vnorm);
    r.check("follower characterization |mu v + p|_O / (1 + |v|)", cg.residual / (1.0 + vnorm), c.tol);

    PicardOptions po;
    po.tol = c.picard_tol;
    const CoupledState pic = solve_optimality_system(p, po);
    const SpaceTimeField vp = distributed_response(p.system(), pic.p);
    r.count("picard iterations", pic.trace.iterations);
    r.value("picard contraction", pic.trace.contraction);
    r.check("cg and picard routes |v_cg - v_picard| / (1 + |v|)",
            control_norm(cg.v_hat - vp, s.grid, s.time, &*s.follower) / (1.0 + vnorm),
            1e3 * c.tol);
    const auto bound = estimate_control_bound(p, {c.tol, c.max_iter});
    r.line("control bound |v| / (|f| + |z0|)", bound ? sci(*bound) : std::string("undefined"));
    write_file(dir, "follower.dat",
               field_table(s.grid, s.time, "v_hat z p", {&cg.v_hat, &cg.z, &cg.p}), out);
    return cg.converged ? kExitOk : kExitNonConvergence;
}

int sweep_section(const ScenarioConfig& c, const LeaderProblem& lp, const std::vector<double>& eps,
                  Report& r, const fs::path& dir, ScenarioOutcome& out) {
    const SweepReport rep = epsilon_sweep(lp, eps, leader_options(c));
    std::ostringstream body;
    write_sweep(body, rep);
    write_file(dir, "sweep.dat", body.str(), out);
    r.count("sweep rows", static_cast<long>(rep.rows.size()));
    if (rep.slope) {
        r.band("terminal decay slope of log|z(T)| vs log eps", *rep.slope, 0.4, 0.6);
    } else {
        r.line("terminal decay slope", "undefined");
    }
    if (rep.control_ratio) {
        r.check("control norm ratio max/min over the sweep", *rep.control_ratio, 10.0);
    }
    r.flag("terminal norm nonincreasing", rep.terminal_monotone);
    r.flag("control norm nondecreasing", rep.control_monotone);
    double worst = 0.0;
    for (const SweepRow& row : rep.rows) worst = std::max(worst, row.duality_gap);
    r.check("max duality identity gap over the sweep", worst, 1e-8);
    if (rep.aborted) {
        r.line("sweep aborted", rep.abort_reason);
        return kExitNonConvergence;
    }
    return kExitOk;
}

void leader_section(const LeaderSolution& sol, const LeaderProblem& lp, double tol, Report& r) {
    r.value("epsilon", lp.epsilon);
    r.value("|z(T)|", sol.terminal_norm);
    r.value("|f_hat|_omega", sol.control_norm);
    r.value("J_eps", sol.objective);
    r.count("cg iterations", sol.cg_iterations);
    r.flag("cg converged", sol.converged);
    if (sol.stagnated) r.line("warning", "CG residual stagnated (ill-conditioning as eps -> 0)");
    r.check("leader characterization |f - rho|_omega / (1 + |f|)",
            sol.characterization / (1.0 + sol.control_norm), 10.0 * tol);
    r.check("duality identity gap", sol.duality_gap, 1e-8);
}

double uncontrolled_terminal(const LeaderProblem& lp, const LeaderOptions& o) {
    const SpaceTimeField zero(lp.grid(), lp.time());
    PicardOptions po;
    po.tol = o.tol * o.inner_factor;
    const CoupledState s = solve_coupled(lp.system, zero, lp.initial, lp.target, po);
    return space_norm(s.z.slice(lp.time().steps()), lp.grid());
}

int run_leader(const ScenarioConfig& c, Report& r, const fs::path& dir, ScenarioOutcome& out,
               const std::vector<double>* sweep_eps) {
    const Setup s = make_setup(c);
    header(r, c, s);
    const LeaderProblem lp = leader_problem(c, s, c.epsilon);
    weights_section(r, c, s, lp.target);
    int code = kExitOk;
    if (!sweep_eps) {
        const LeaderOptions o = leader_options(c);
        const LeaderSolution sol = solve_leader_cg(lp, o);
        r.value("|z(T)| without leader", uncontrolled_terminal(lp, o));
        leader_section(sol, lp, c.tol, r);
        if (c.channel == ChannelKind::boundary) {
            const Vector u = boundary_response(lp.system, sol.p);
            const int node = boundary_node(s.grid, c.gamma_side);
            double trace = 0.0;
            for (int k = 1; k <= s.time.steps(); ++k) {
                trace = std::max(trace, std::abs(sol.z(k, node) - c.gamma_profile * u[k]));
            }
            r.check("trace coupling max |z_Gamma - profile u_hat|", trace, 1e-10);
            std::ostringstream body;
            write_boundary_series(body, s.time, u, node);
            write_file(dir, "boundary_control.dat", body.str(), out);
        }
        write_file(dir, "leader.dat",
                   field_table(s.grid, s.time, "f_hat z rho", {&sol.f_hat, &sol.z, &sol.rho}), out);
        if (!sol.converged) code = kExitNonConvergence;
    }
    r.blank();
    const int sc = sweep_section(c, lp, sweep_eps ? *sweep_eps : c.eps_list, r, dir, out);
    std::ostringstream wt;
    write_weight_table(wt, s.weights, s.time);
    write_file(dir, "weights.dat", wt.str(), out);
    return code != kExitOk ? code : sc;
}

int run_semilinear(const ScenarioConfig& c, Report& r, const fs::path& dir, ScenarioOutcome& out) {
    const Setup s = make_setup(c);
    header(r, c, s);
    const Nonlinearity G = Nonlinearity::from_name(c.nonlinearity, c.nonlinearity_amplitude);
    r.line("nonlinearity", G.name + " amplitude " + sci(G.amplitude) + ", placement " + c.placement);
    r.flag("bound |G'| + |G''| <= L respected on samples", check_bound(G));
    SemilinearProblem base{s.grid,
                           s.time,
                           s.kernel,
                           coupled(c, s).channel,
                           s.omega,
                           s.target,
                           c.mu,
                           c.epsilon,
                           G,
                           c.placement == "kernel" ? Placement::kernel : Placement::reaction,
                           Vector(),
                           SpaceTimeField(),
                           SpaceTimeField()};
    const SemilinearProblem p = reduce_semilinear(
        base, generate(c.initial, s.grid, c.base_dir), generate(c.initial_reference, s.grid, c.base_dir),
        broadcast(generate(c.target, s.grid, c.base_dir), s.grid, s.time));
    SemilinearOptions o;
    o.tol = c.tol;
    o.max_outer = c.max_outer;
    o.leader = leader_options(c);
    const SemilinearRun run = solve_semilinear_stackelberg(p, o);
    std::ostringstream body;
    write_semilinear_trace(body, run);
    write_file(dir, "semilinear_trace.dat", body.str(), out);
    r.count("outer iterations", static_cast<long>(run.trace.size()));
    r.flag("outer loop converged", run.converged);
    if (run.trace.size() >= 2) r.value("last contraction", run.trace.back().contraction);
    r.value("|z(T)|", run.terminal_norm);
    r.value("max |a|, |b| over iterates", run.max_coefficient);
    r.check("coefficient bound max |a|,|b| - L", std::max(0.0, run.max_coefficient - G.bound), 0.0);
    r.check("duality identity gap (final linearised problem)", run.final.duality_gap, 1e-8);
    return run.converged ? kExitOk : kExitNonConvergence;
}

int probe_section(const ScenarioConfig& c, int samples, Report& r, const fs::path& dir,
                  ScenarioOutcome& out) {
    const Setup s = make_setup(c);
    header(r, c, s);
    ObservabilityOptions o;
    o.samples = samples;
    o.seed = c.seed;
    o.modes = c.modes;
    o.picard.tol = c.picard_tol;
    const ObservabilityWeight w = c.channel == ChannelKind::distributed ? ObservabilityWeight::varpi1
                                                                         : ObservabilityWeight::varpi2;
    const ObservabilityStats st = probe_observability(coupled(c, s), s.weights, w, o);
    r.line("weight", w == ObservabilityWeight::varpi1 ? "varpi1" : "varpi2");
    r.count("samples", st.samples);
    r.count("skipped samples", st.skipped);
    r.value("max ratio", st.max_ratio);
    r.value("median ratio", st.median_ratio);
    std::ostringstream body;
    body << "# sample ratio\n";
    body.precision(10);
    for (std::size_t i = 0; i < st.ratios.size(); ++i) body << i << ' ' << st.ratios[i] << '\n';
    write_file(dir, "observability.dat", body.str(), out);
    std::ostringstream wt;
    write_weight_table(wt, s.weights, s.time);
    write_file(dir, "weights.dat", wt.str(), out);
    return std::isfinite(st.max_ratio) ? kExitOk : kExitNonConvergence;
}

}  // namespace

std::string resolve_output_dir(const ScenarioConfig& config) {
    fs::path p(config.output);
    if (const char* root = std::getenv("NLS_OUTPUT_ROOT"); root && *root && p.is_relative()) {
        p = fs::path(root) / p;
    }
    return p.string();
}

ScenarioOutcome run_scenario(const ScenarioConfig& c, const std::string& out_dir) {
    validate(c);
    return guarded(c, out_dir, [&](Report& r, const fs::path& dir, ScenarioOutcome& out) {
        switch (c.kind) {
            case ExperimentKind::follower: return run_follower(c, r, dir, out);
            case ExperimentKind::leader:
            case ExperimentKind::boundary: return run_leader(c, r, dir, out, nullptr);
            case ExperimentKind::semilinear: return run_semilinear(c, r, dir, out);
            case ExperimentKind::observability: return probe_section(c, c.samples, r, dir, out);
        }
        return static_cast<int>(kExitConfig);
    });
}

ScenarioOutcome run_sweep(const ScenarioConfig& c, const std::vector<double>& eps_list,
                          const std::string& out_dir) {
    validate(c);
    if (eps_list.empty()) throw ConfigError("empty epsilon list");
    return guarded(c, out_dir, [&](Report& r, const fs::path& dir, ScenarioOutcome& out) {
        return run_leader(c, r, dir, out, &eps_list);
    });
}

ScenarioOutcome run_probe(const ScenarioConfig& c, int samples, const std::string& out_dir) {
    validate(c);
    if (samples < 1) throw ConfigError("need at least one sample");
    return guarded(c, out_dir, [&](Report& r, const fs::path& dir, ScenarioOutcome& out) {
        return probe_section(c, samples, r, dir, out);
    });
}

}  // namespace nls
