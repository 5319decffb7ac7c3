#include "nls/errors.hpp"
#include "nls/leader.hpp"
#include "nls_verify/dense.hpp"
#include "nls_verify/fd.hpp"
#include "nls_verify/instances.hpp"
#include "nls_verify/registry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace nls;
using namespace nls::verify;

NLS_ORACLE("solve_leader_cg", "dense leader normal equations");
NLS_ORACLE("solve_adjoint_pair", "dense adjoint-pair block solve");
NLS_ORACLE("epsilon_sweep", "per-epsilon dense leader normal equations");

namespace {

LeaderProblem zero_data(LeaderProblem p) {
    p.initial = Vector::Zero(p.grid().nodes());
    p.target = SpaceTimeField(p.grid(), p.time());
    return p;
}

const LeaderOptions kTight{1e-12, 500, 1e-2, 400};

}  // namespace

TEST_SUITE("leader") {

TEST_CASE("objective on zero data") {
    const LeaderProblem p = zero_data(leader_instance(1, {}, 1e-2));
    CHECK(leader_objective(p, SpaceTimeField(p.grid(), p.time())) == 0.0);
    CHECK(leader_gradient(p, SpaceTimeField(p.grid(), p.time())).max_abs() == 0.0);
}

TEST_CASE("objective is a quadratic matching the dense affine map") {
    Rng rng(5);
    for (bool boundary : {false, true}) {
        const LeaderProblem p =
            boundary ? boundary_leader_instance(2, {}, 1e-2) : leader_instance(2, {}, 1e-2);
        const DenseLeader d = dense_leader(p);
        const SpaceTimeField f = random_field(p.grid(), p.time(), rng).masked(p.system.leader_region);
        const SpaceTimeField dir = random_field(p.grid(), p.time(), rng).masked(p.system.leader_region);
        auto J = [&](double s) { return leader_objective(p, f + s * dir, kTight); };
        const double j0 = J(0.0), jp = J(1.0), jm = J(-1.0);
        const double a = 0.5 * (jp + jm) - j0;
        const double b = 0.5 * (jp - jm);
        CHECK(std::abs(J(2.0) - (j0 + 2.0 * b + 4.0 * a)) <= 1e-9 * std::abs(J(2.0)));
        CHECK(J(0.0) == doctest::Approx(d.value(f)).epsilon(1e-10));
        CHECK(J(1.0) == doctest::Approx(d.value(f + dir)).epsilon(1e-10));
    }
}

TEST_CASE("leader gradient against central differences") {
    Rng rng(9);
    InstanceOptions opt;
    opt.n = 8;
    opt.steps = 8;
    for (bool boundary : {false, true}) {
        for (std::uint64_t seed : {3u, 4u}) {
            const LeaderProblem p =
                boundary ? boundary_leader_instance(seed, opt, 1e-2) : leader_instance(seed, opt, 1e-2);
            const RegionMask& w = p.system.leader_region;
            const SpaceTimeField f = random_field(p.grid(), p.time(), rng).masked(w);
            const SpaceTimeField dir = random_field(p.grid(), p.time(), rng).masked(w);
            const double adj =
                control_dot(leader_gradient(p, f, kTight), dir, p.grid(), p.time(), &w);
            const double fd = finite_difference_gradient(
                [&](const SpaceTimeField& x) { return leader_objective(p, x, kTight); }, f, dir, 1e-5);
            CHECK(std::abs(adj - fd) <= 1e-6 * std::abs(fd));
        }
    }
}

TEST_CASE("adjoint pair against the dense block solve") {
    Rng rng(12);
    for (bool boundary : {false, true}) {
        const LeaderProblem p =
            boundary ? boundary_leader_instance(5, {}, 1e-2) : leader_instance(5, {}, 1e-2);
        const Vector terminal = random_slice(p.grid(), rng);
        const AdjointPair a = solve_adjoint_pair(p.system, terminal, {1e-14, 400, 1e3});
        const OracleAdjoint o = dense_adjoint_pair(p.system, terminal);
        CHECK((a.rho - o.rho).max_abs() <= 1e-11 * (1.0 + o.rho.max_abs()));
        CHECK((a.psi - o.psi).max_abs() <= 1e-11 * (1.0 + o.psi.max_abs()));
    }
}

TEST_CASE("CG leader against dense normal equations") {
    for (bool boundary : {false, true}) {
        for (std::uint64_t seed : {6u, 7u, 8u}) {
            const LeaderProblem p =
                boundary ? boundary_leader_instance(seed, {}, 1e-3) : leader_instance(seed, {}, 1e-3);
            const LeaderSolution s = solve_leader_cg(p, kTight);
            REQUIRE(s.converged);
            const DenseLeader d = dense_leader(p);
            const double err = control_norm(s.f_hat - d.f_field, p.grid(), p.time());
            CHECK(err <= 1e-8 * (1.0 + control_norm(d.f_field, p.grid(), p.time())));
            CHECK(s.terminal_norm == doctest::Approx(d.terminal_norm).epsilon(1e-8));
            CHECK(s.objective == doctest::Approx(d.objective).epsilon(1e-9));
            // first-order condition and duality identity
            CHECK(s.characterization <= 1e-12 * (1.0 + s.control_norm) * 10.0);
            CHECK(s.duality_gap <= 1e-9);
        }
    }
}

TEST_CASE("zero data give a zero leader") {
    const LeaderProblem p = zero_data(leader_instance(9, {}, 1e-3));
    const LeaderSolution s = solve_leader_cg(p);
    CHECK(s.f_hat.max_abs() == 0.0);
    CHECK(s.terminal_norm == 0.0);
    CHECK(s.duality_gap == 0.0);
}

TEST_CASE("the leader drives the terminal state down") {
    const LeaderProblem p = benchmark_leader(31, 32, 1e-4);
    const LeaderSolution s = solve_leader_cg(p, {1e-10, 1000});
    REQUIRE(s.converged);
    const LeaderSolution none = [&] {
        LeaderSolution out;
        const CoupledState c = solve_coupled(p.system, SpaceTimeField(p.grid(), p.time()), p.initial,
                                             p.target);
        out.terminal_norm = space_norm(c.z.slice(p.time().steps()), p.grid());
        return out;
    }();
    MESSAGE("terminal norm reduction factor " << none.terminal_norm / s.terminal_norm);
    CHECK(none.terminal_norm / s.terminal_norm >= 10.0);
}

TEST_CASE("duality gap follows the solver tolerance") {
    const LeaderProblem p = leader_instance(10, {}, 1e-3);
    const LeaderSolution tight = solve_leader_cg(p, kTight);
    CHECK(tight.duality_gap <= 1e-9);
    const LeaderSolution loose = solve_leader_cg(p, {1e-3, 500});
    MESSAGE("duality gap at tol 1e-12: " << tight.duality_gap << ", at tol 1e-3: " << loose.duality_gap);
}

TEST_CASE("reduction to null control") {
    const LeaderProblem bench = benchmark_leader(128, 256, 1e-4);
    const Vector y0 = bench.initial;
    const SpaceTimeField yd(bench.grid(), bench.time());

    const LeaderProblem same = reduce_to_null(bench.system, y0, y0, yd, 1e-4);
    CHECK(same.initial.cwiseAbs().maxCoeff() == 0.0);

    const LeaderProblem zero_ref = reduce_to_null(bench.system, y0, Vector::Zero(y0.size()), yd, 1e-4);
    REQUIRE(zero_ref.reference.has_value());
    CHECK(zero_ref.reference->max_abs() == 0.0);
    CHECK(zero_ref.initial == y0);
    CHECK(zero_ref.target == yd);

    // ybar from sin(pi x) under the eigen-kernel (c = 1): exp(-(pi^2 + 1/2) t) sin(pi x)
    const LeaderProblem r = reduce_to_null(bench.system, Vector::Zero(y0.size()), y0, yd, 1e-4);
    const TimeGrid& t = bench.time();
    const Grid& g = bench.grid();
    const double rate = std::numbers::pi * std::numbers::pi + 0.5;
    double err = 0.0;
    for (int i = 0; i < g.nodes(); ++i) {
        err = std::max(err, std::abs((*r.reference)(t.steps(), i) -
                                     std::exp(-rate * t.horizon()) * std::sin(std::numbers::pi * g.x(i))));
    }
    CHECK(err <= 2e-3);
    CHECK((r.target + *r.reference).max_abs() == 0.0);
}

TEST_CASE("sweep on zero data") {
    const LeaderProblem p = zero_data(leader_instance(11, {}, 1e-2));
    const SweepReport rep = epsilon_sweep(p, {1e-1, 1e-2, 1e-3});
    REQUIRE(rep.rows.size() == 3);
    for (const auto& r : rep.rows) CHECK(r.terminal_norm == 0.0);
    CHECK_FALSE(rep.slope.has_value());
}

TEST_CASE("sweep rows match per-epsilon dense solves") {
    const LeaderProblem p = leader_instance(12, {}, 1e-2);
    const std::vector<double> eps{1e-1, 1e-2, 1e-3};
    const SweepReport rep = epsilon_sweep(p, eps, kTight);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.terminal_monotone);
    CHECK(rep.control_monotone);
    for (std::size_t j = 0; j < eps.size(); ++j) {
        LeaderProblem q = p;
        q.epsilon = eps[j];
        CHECK(rep.rows[j].terminal_norm == doctest::Approx(dense_leader(q).terminal_norm).epsilon(1e-8));
    }
    std::ostringstream os;
    write_sweep(os, rep);
    CHECK(os.str().rfind("# epsilon terminal_norm control_norm cg_iters duality_gap\n", 0) == 0);
}

TEST_CASE("log-log slope") {
    CHECK(*loglog_slope({1.0, 10.0, 100.0}, {2.0, 2.0 * std::sqrt(10.0), 20.0}) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK_FALSE(loglog_slope({1.0}, {1.0}).has_value());
    CHECK_FALSE(loglog_slope({1.0, 2.0}, {0.0, 1.0}).has_value());
}

TEST_CASE("omega must meet O_d") {
    LeaderProblem p = leader_instance(13, {}, 1e-2);
    p.system.target_region = RegionMask("O_d", {0.6, 0.9}, p.grid());
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

}  // TEST_SUITE
