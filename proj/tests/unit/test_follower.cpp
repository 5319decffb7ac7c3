#include "nls/errors.hpp"
#include "nls/follower.hpp"
#include "nls_verify/dense.hpp"
#include "nls_verify/fd.hpp"
#include "nls_verify/instances.hpp"
#include "nls_verify/registry.hpp"

#include <doctest.h>

#include <cmath>

using namespace nls;
using namespace nls::verify;

NLS_ORACLE("solve_follower_cg", "dense follower KKT solve");
NLS_ORACLE("solve_optimality_system", "dense follower KKT solve and CG cross-route");
NLS_ORACLE("solve_coupled", "dense follower KKT solve");
NLS_ORACLE("conjugate_gradient", "follower CG against the dense KKT solve");

namespace {

FollowerProblem zero_problem(const FollowerProblem& p) {
    FollowerProblem z = p;
    z.leader = SpaceTimeField(p.grid(), p.time());
    z.target = SpaceTimeField(p.grid(), p.time());
    z.initial = Vector::Zero(p.grid().nodes());
    return z;
}

double rel(const SpaceTimeField& a, const SpaceTimeField& b, const Grid& g, const TimeGrid& t) {
    return control_norm(a - b, g, t) / (1.0 + control_norm(b, g, t));
}

}  // namespace

TEST_SUITE("follower") {

TEST_CASE("objective on trivial data") {
    const FollowerProblem p = zero_problem(follower_instance(1));
    CHECK(follower_objective(p, SpaceTimeField(p.grid(), p.time())) == 0.0);
}

TEST_CASE("objective without the follower reduces to tracking") {
    const FollowerProblem p = follower_instance(2);
    const SpaceTimeField zero(p.grid(), p.time());
    ForwardProblem fp{p.initial, p.leader.masked(p.leader_region), {}};
    const SpaceTimeField zf = p.solver->forward(fp);
    const double track = control_norm(zf - p.target, p.grid(), p.time(), &p.target_region);
    CHECK(follower_objective(p, zero) == doctest::Approx(0.5 * track * track).epsilon(1e-14));
}

TEST_CASE("objective matches an independent quadrature") {
    Rng rng(33);
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const FollowerProblem p = follower_instance(seed);
        const SpaceTimeField v = random_field(p.grid(), p.time(), rng);
        CHECK(follower_objective(p, v) ==
              doctest::Approx(follower_cost_quadrature(p, v)).epsilon(1e-12));
    }
}

TEST_CASE("gradient against central differences") {
    Rng rng(7);
    InstanceOptions opt;
    opt.n = 8;
    opt.steps = 8;
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const FollowerProblem p = follower_instance(seed, opt);
        const SpaceTimeField v = random_field(p.grid(), p.time(), rng).masked(p.follower_region);
        const SpaceTimeField w = random_field(p.grid(), p.time(), rng).masked(p.follower_region);
        const SpaceTimeField grad = follower_gradient(p, v);
        const double adj = control_dot(grad, w, p.grid(), p.time(), &p.follower_region);
        const double fd = finite_difference_gradient(
            [&](const SpaceTimeField& x) { return follower_objective(p, x); }, v, w, 1e-5);
        CHECK(std::abs(adj - fd) <= 1e-6 * std::abs(fd));
    }
}

TEST_CASE("gradient vanishes when the target is reached without control") {
    const FollowerProblem base = follower_instance(13);
    FollowerProblem p = base;
    p.leader = SpaceTimeField(p.grid(), p.time());
    const SpaceTimeField zero(p.grid(), p.time());
    p.target = p.solver->forward({p.initial, std::nullopt, {}});
    CHECK(follower_gradient(p, zero).max_abs() == 0.0);
}

TEST_CASE("zero data give a zero follower") {
    const FollowerProblem p = zero_problem(follower_instance(14));
    const FollowerSolution s = solve_follower_cg(p);
    CHECK(s.iterations == 0);
    CHECK(s.converged);
    CHECK(s.v_hat.max_abs() == 0.0);
    const CoupledState c = solve_optimality_system(p);
    CHECK(c.trace.iterations == 1);
    CHECK(c.z.max_abs() == 0.0);
    CHECK(c.p.max_abs() == 0.0);
}

TEST_CASE("CG follower against the dense KKT oracle") {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        const FollowerProblem p = follower_instance(seed);
        const FollowerSolution s = solve_follower_cg(p, {1e-12, 500});
        REQUIRE(s.converged);
        const OracleState o = dense_follower(p.system(), p.leader, p.initial, p.target);
        const SpaceTimeField v_oracle = (-1.0 / p.mu) * align_adjoint(o.p).masked(p.follower_region);
        CHECK(rel(s.v_hat, v_oracle, p.grid(), p.time()) <= 1e-8);
        CHECK(rel(s.z, o.z, p.grid(), p.time()) <= 1e-8);
        // first-order condition
        CHECK(s.residual <= 1e-8 * (1.0 + control_norm(s.v_hat, p.grid(), p.time())));
        CHECK(control_norm(follower_gradient(p, s.v_hat), p.grid(), p.time()) <=
              1e-8 * (1.0 + control_norm(s.v_hat, p.grid(), p.time())));
    }
}

TEST_CASE("oracle state satisfies the time-stepping recurrences") {
    const FollowerProblem p = follower_instance(26);
    const OracleState o = dense_follower(p.system(), p.leader, p.initial, p.target);
    const SpaceTimeField v = (-1.0 / p.mu) * align_adjoint(o.p).masked(p.follower_region);
    const SpaceTimeField z = p.solver->forward({p.initial, p.leader.masked(p.leader_region) + v, {}});
    const SpaceTimeField q = p.solver->backward(
        {Vector::Zero(p.grid().nodes()), (z - p.target).masked(p.target_region)});
    CHECK((z - o.z).max_abs() <= 1e-12 * (1.0 + o.z.max_abs()));
    CHECK((q - o.p).max_abs() <= 1e-12 * (1.0 + o.p.max_abs()));
    CHECK(assemble_follower_kkt(zero_problem(p)).solve().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Picard route agrees with CG") {
    for (std::uint64_t seed = 30; seed < 33; ++seed) {
        const FollowerProblem p = follower_instance(seed);
        const CoupledState c = solve_optimality_system(p);
        const FollowerSolution s = solve_follower_cg(p, {1e-12, 500});
        const SpaceTimeField v = distributed_response(p.system(), c.p);
        CHECK(rel(v, s.v_hat, p.grid(), p.time()) <= 1e-7);
        CHECK(c.trace.contraction < 1.0);
        const OracleState o = dense_follower(p.system(), p.leader, p.initial, p.target);
        CHECK(rel(c.z, o.z, p.grid(), p.time()) <= 1e-10);
    }
}

TEST_CASE("Picard route detects divergence for a tiny mu") {
    InstanceOptions opt;
    opt.mu = 1e-6;
    const FollowerProblem p = follower_instance(40, opt);
    CHECK_THROWS_AS(solve_optimality_system(p), NonContractionError);
    try {
        solve_optimality_system(p);
    } catch (const NonContractionError& e) {
        CHECK(e.contraction() > 1.0);
    }
}

TEST_CASE("control bound estimate") {
    const FollowerProblem zero = zero_problem(follower_instance(41));
    CHECK_FALSE(estimate_control_bound(zero).has_value());

    const FollowerProblem p = follower_instance(42);
    FollowerProblem scaled = p;
    scaled.leader = 10.0 * p.leader;
    scaled.initial = 10.0 * p.initial;
    scaled.target = 10.0 * p.target;
    const CgOptions tight{1e-13, 500};
    const auto a = estimate_control_bound(p, tight);
    const auto b = estimate_control_bound(scaled, tight);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(std::abs(*a - *b) <= 1e-10 * *a);

    double worst = 0.0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        FollowerProblem q = follower_instance(seed);
        q.target = SpaceTimeField(q.grid(), q.time());
        const auto r = estimate_control_bound(q);
        REQUIRE(r.has_value());
        worst = std::max(worst, *r);
    }
    CHECK(std::isfinite(worst));
    MESSAGE("max |v|/(|f| + |z0|) over 20 instances: " << worst);
}

TEST_CASE("region hypotheses") {
    FollowerProblem p = follower_instance(43);
    p.follower_region = RegionMask("O", {0.2, 0.4}, p.grid());
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = follower_instance(43);
    p.mu = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

}  // TEST_SUITE
