#include "nls/errors.hpp"
#include "nls_verify/dense.hpp"
#include "nls_verify/fd.hpp"
#include "nls_verify/instances.hpp"
#include "nls_verify/refinement.hpp"
#include "nls_verify/registry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace nls;
using namespace nls::verify;

namespace {

Vector sine(const Grid& g) {
    Vector v(g.nodes());
    for (int i = 0; i < g.nodes(); ++i) v[i] = std::sin(std::numbers::pi * g.x(i));
    v[0] = 0.0;
    v[g.nodes() - 1] = 0.0;
    return v;
}

// Max nodal error of the heat solve from sin(pi x) against `decay` sin(pi x).
double heat_error(int n, int steps, double horizon, double decay) {
    const Grid g(1.0, n);
    const TimeGrid t(horizon, steps);
    const Vector s = sine(g);
    const SpaceTimeField y = make_solver(g, t)->forward({s, std::nullopt, {}});
    return (y.slice(steps) - decay * s).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("verification") {

TEST_CASE("finite differences are exact on quadratics") {
    const Vector x = Vector::LinSpaced(4, -1.0, 2.0);
    const Vector d = Vector::LinSpaced(4, 0.5, -0.7);
    auto q = [](const Vector& v) { return 3.0 * v.squaredNorm() + v.sum(); };
    const double exact = 6.0 * x.dot(d) + d.sum();
    CHECK(finite_difference_gradient(q, x, d, 0.1) == doctest::Approx(exact).epsilon(1e-13));
    CHECK(finite_difference_curvature(q, x, d, 0.1) == doctest::Approx(6.0 * d.squaredNorm()).epsilon(1e-11));
    auto sq = [](const Vector& v) { return v.squaredNorm(); };
    CHECK(finite_difference_gradient(sq, Vector::Zero(4).eval(), d, 1e-3) == 0.0);
    CHECK_THROWS_AS(finite_difference_gradient(sq, x, d, 0.0), std::invalid_argument);
}

TEST_CASE("temporal order of the implicit Euler heat solve") {
    const int n = 31;
    const Grid g(1.0, n);
    const double h = g.h();
    const double lambda_h = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
    const double T = 0.1;
    const RefinementStudy r = refinement_study(
        [&](int l) { return heat_error(n, 8 << l, T, std::exp(-lambda_h * T)); }, 4);
    CHECK(r.monotone);
    REQUIRE(r.mean_order().has_value());
    MESSAGE("temporal order " << *r.mean_order());
    CHECK(std::abs(*r.mean_order() - 1.0) <= 0.2);
}

TEST_CASE("spatial order of the heat solve") {
    const int steps = 16;
    const double T = 0.1;
    const double dt = T / steps;
    const double decay = std::pow(1.0 + std::numbers::pi * std::numbers::pi * dt, -steps);
    const RefinementStudy r =
        refinement_study([&](int l) { return heat_error((8 << l) - 1, steps, T, decay); }, 4);
    CHECK(r.monotone);
    REQUIRE(r.mean_order().has_value());
    MESSAGE("spatial order " << *r.mean_order());
    CHECK(std::abs(*r.mean_order() - 2.0) <= 0.3);
}

TEST_CASE("refinement study edge cases") {
    const RefinementStudy flat = refinement_study([](int) { return 0.0; }, 3);
    CHECK_FALSE(flat.mean_order().has_value());
    CHECK_FALSE(flat.monotone);
    CHECK_THROWS_AS(refinement_study([](int) { return 1.0; }, 2), std::invalid_argument);
    const RefinementStudy rich = richardson_study([](int l) { return 1.0 + std::pow(0.5, 2 * l); }, 4);
    REQUIRE(rich.mean_order().has_value());
    CHECK(*rich.mean_order() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dense oracles refuse oversized systems") {
    InstanceOptions opt;
    opt.n = 40;
    opt.steps = 40;
    opt.random_kernel = false;
    const FollowerProblem p = follower_instance(1, opt);
    CHECK_THROWS_AS(assemble_follower_kkt(p), DimensionError);
}

TEST_CASE("every iterative solver has an oracle test") {
    const auto missing = missing_oracles();
    for (const auto& name : missing) MESSAGE("no oracle registered for " << name);
    CHECK(missing.empty());
    for (const auto& name : iterative_solvers()) CHECK(!oracle_registry()[name].empty());
}

}  // TEST_SUITE
