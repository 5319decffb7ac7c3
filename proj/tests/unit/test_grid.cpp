#include "nls/errors.hpp"
#include "nls/grid.hpp"
#include "nls_verify/instances.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nls;

TEST_SUITE("grid") {

TEST_CASE("grid geometry") {
    const Grid g(2.0, 7);
    CHECK(g.h() == doctest::Approx(0.25));
    CHECK(g.x(0) == 0.0);
    CHECK(g.x(8) == doctest::Approx(2.0));
    CHECK(g.trapezoid_weights().sum() == doctest::Approx(2.0).epsilon(1e-15));
    const TimeGrid t(0.3, 7);
    CHECK(t.t(0) == 0.0);
    CHECK(t.t(7) == 0.3);
    CHECK(t.dt() == doctest::Approx(0.3 / 7));
}

TEST_CASE("laplacian of a constant") {
    const Grid g(1.0, 3);
    REQUIRE(g.h() == 0.25);
    const double c = 1.7;
    const Vector lap = build_laplacian(g).apply(Vector::Constant(3, c));
    CHECK(lap[0] == doctest::Approx(-c / (0.25 * 0.25)));
    CHECK(lap[2] == doctest::Approx(-c / (0.25 * 0.25)));
    CHECK(lap[1] == doctest::Approx(0.0));
}

TEST_CASE("discrete sine is an eigenvector") {
    const Grid g(1.0, 20);
    Vector u(20);
    for (int i = 1; i <= 20; ++i) u[i - 1] = std::sin(std::numbers::pi * g.x(i));
    const double h = g.h();
    const double lambda = -(2.0 / (h * h)) * (1.0 - std::cos(std::numbers::pi * h));
    CHECK((build_laplacian(g).apply(u) - lambda * u).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("laplacian apply matches dense multiply and is symmetric") {
    verify::Rng rng(3);
    const Grid g(1.0, 8);
    const auto op = build_laplacian(g);
    const Vector u = verify::random_slice(g, rng).segment(1, 8);
    const Vector w = verify::random_slice(g, rng).segment(1, 8);
    Matrix dense = Matrix::Zero(8, 8);
    const double c = 1.0 / (g.h() * g.h());
    for (int i = 0; i < 8; ++i) {
        dense(i, i) = -2.0 * c;
        if (i > 0) dense(i, i - 1) = c;
        if (i < 7) dense(i, i + 1) = c;
    }
    CHECK((op.apply(u) - dense * u).norm() < 1e-12 * (dense * u).norm());
    CHECK(std::abs(op.apply(u).dot(w) - u.dot(op.apply(w))) < 1e-12 * c * u.norm() * w.norm());
    const Eigen::SelfAdjointEigenSolver<Matrix> es(op.dense());
    CHECK(es.eigenvalues().maxCoeff() < 0.0);
}

TEST_CASE("laplacian needs two interior nodes") {
    CHECK_THROWS_AS(build_laplacian(Grid(1.0, 1)), DimensionError);
}

TEST_CASE("trapezoid integrals") {
    const Grid g(1.0, 9);
    CHECK(integrate_space(Vector::Ones(g.nodes()), g) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(integrate_space(g.coordinates(), g) == doctest::Approx(0.5).epsilon(1e-15));
    const Grid g64(1.0, 64);
    Vector s(g64.nodes());
    for (int i = 0; i < g64.nodes(); ++i) s[i] = std::sin(std::numbers::pi * g64.x(i));
    CHECK(std::abs(integrate_space(s, g64) - 2.0 / std::numbers::pi) < 1e-3);
    CHECK_THROWS_AS(integrate_space(Vector::Ones(3), g), DimensionError);
}

TEST_CASE("space-time norms") {
    const Grid g(1.0, 16);
    const TimeGrid t(1.0, 16);
    CHECK(norm_l2_spacetime(SpaceTimeField(g, t), g, t) == 0.0);
    const auto one = SpaceTimeField::sample(g, t, [](double, double) { return 1.0; });
    CHECK(norm_l2_spacetime(one, g, t) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("masked space-time norm of t x") {
    // Closed form of the discrete double sum: trapezoid in t, sharp mask in x.
    const int n = 128;
    const int N = 128;
    const Grid g(1.0, n);
    const TimeGrid t(1.0, N);
    const RegionMask m("omega", {1e-9, 0.5}, g);
    const auto f = SpaceTimeField::sample(g, t, [](double tt, double x) { return tt * x; });
    const double value = norm_l2_spacetime(f, g, t, &m);

    const double dt = 1.0 / N;
    const double tsum = dt * dt * dt * N * (N + 1.0) * (2.0 * N + 1.0) / 6.0 - 0.5 * dt;
    const double h = g.h();
    const int last = static_cast<int>(std::floor(0.5 / h));
    const double xsum = h * h * h * last * (last + 1.0) * (2.0 * last + 1.0) / 6.0;
    CHECK(std::abs(value - std::sqrt(tsum * xsum)) < 1e-12);

    // Against the exact integral the sharp mask edge costs at most h * f(0.5)^2
    // on top of the O(h^2) trapezoid error.
    const double exact = std::sqrt(1.0 / 72.0);
    CHECK(std::abs(value * value - exact * exact) < h * 0.25 + 1e-4);
}

TEST_CASE("masks") {
    const Grid g(1.0, 9);
    const RegionMask m("O", {0.3, 0.5}, g);
    CHECK(m.count() == 3);   // 0.3, 0.4, 0.5
    for (int i = 0; i < g.nodes(); ++i) {
        const bool inside = g.x(i) >= 0.3 - 1e-12 && g.x(i) <= 0.5 + 1e-12;
        CHECK(m[i] == (inside ? 1.0 : 0.0));
    }
    verify::Rng rng(1);
    const TimeGrid t(1.0, 4);
    const SpaceTimeField f = verify::random_field(g, t, rng);
    CHECK(f.masked(m).masked(m) == f.masked(m));
    CHECK_THROWS_AS(RegionMask("bad", {0.5, 0.3}, g), ConfigError);
    CHECK_THROWS_AS(RegionMask("bad", {0.0, 0.3}, g), ConfigError);
    CHECK(Interval{0.1, 0.3}.intersects(Interval{0.3, 0.5}));
    CHECK_FALSE(Interval{0.1, 0.3}.intersects(Interval{0.5, 0.7}));
}

TEST_CASE("control pairing") {
    const Grid g(1.0, 5);
    const TimeGrid t(1.0, 4);
    const auto one = SpaceTimeField::sample(g, t, [](double, double) { return 1.0; });
    // dt * sum_{k>=1} h * (interior count) = 1 * 5/6.
    CHECK(control_dot(one, one, g, t) == doctest::Approx(5.0 / 6.0));
    CHECK_THROWS_AS(control_dot(one, SpaceTimeField(g, TimeGrid(1.0, 3)), g, t), DimensionError);
}

}  // TEST_SUITE
