#include "nls/errors.hpp"
#include "nls/kernel.hpp"
#include "nls/weights.hpp"
#include "nls_verify/instances.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace nls;

namespace {

CarlemanWeights standard_weights(const Grid& g, double horizon) {
    const Vector shape = build_eta0(g, {0.4, 0.6});
    return CarlemanWeights(g, (std::log(2.0) / shape.maxCoeff()) * shape, LProfile(horizon), 2.0,
                           1.0);
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("zero kernel assembles to zero matrices") {
    const Grid g(1.0, 6);
    const TimeGrid t(0.2, 5);
    const auto op = assemble(KernelSpec::zero(), g, t);
    CHECK(op->is_zero());
    for (int k = 0; k <= 5; ++k) CHECK(op->matrix(k).isZero(0.0));
}

TEST_CASE("separable kernel on the first sine") {
    const Grid g(1.0, 128);
    const TimeGrid t(0.1, 4);
    const double c = 1.3;
    const auto op = assemble(KernelSpec::eigen(c, 1, 1.0), g, t);
    CHECK(op->time_constant());
    CHECK(op->symmetric());
    Vector u(g.nodes());
    for (int i = 0; i < g.nodes(); ++i) u[i] = std::sin(std::numbers::pi * g.x(i));
    const Vector out = op->apply(2, u);
    CHECK((out - 0.5 * c * u).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("tabulated kernel matches a triple loop") {
    verify::Rng rng(17);
    const Grid g(1.0, 6);
    const TimeGrid t(0.2, 4);
    const KernelSpec spec = verify::random_kernel(g, t, rng);
    const auto& tab = std::get<TabulatedKernel>(spec.variant());
    const auto op = assemble(spec, g, t);
    CHECK_FALSE(op->symmetric());
    const Vector u = verify::random_slice(g, rng) + Vector::Constant(g.nodes(), 0.3);
    for (int k = 0; k <= t.steps(); ++k) {
        const Vector fast = op->apply(k, u);
        for (int i = 0; i < g.nodes(); ++i) {
            double acc = 0.0;
            for (int j = 0; j < g.nodes(); ++j) {
                const double w = (j == 0 || j == g.nodes() - 1) ? 0.5 * g.h() : g.h();
                acc += tab.samples[k](i, j) * w * u[j];
            }
            CHECK(fast[i] == doctest::Approx(acc).epsilon(1e-13));
        }
        const Vector back = op->apply_transpose(k, u);
        CHECK((back - op->matrix(k).transpose() * u).norm() < 1e-13);
    }
}

TEST_CASE("tabulated kernel file round trip") {
    verify::Rng rng(5);
    const Grid g(1.0, 3);
    const TimeGrid t(0.2, 2);
    const KernelSpec spec = verify::random_kernel(g, t, rng);
    const auto& tab = std::get<TabulatedKernel>(spec.variant());
    std::ostringstream os;
    os.precision(17);
    os << "k i j value\n";
    for (int k = 0; k <= 2; ++k) {
        for (int i = 0; i < g.nodes(); ++i) {
            for (int j = 0; j < g.nodes(); ++j) os << k << ' ' << i << ' ' << j << ' ' << tab.samples[k](i, j) << '\n';
        }
    }
    std::istringstream in(os.str());
    const TabulatedKernel back = load_tabulated_kernel(in, g, t);
    for (int k = 0; k <= 2; ++k) CHECK(back.samples[k] == tab.samples[k]);

    std::istringstream partial("k i j value\n0 0 0 1.0\n");
    CHECK_THROWS_AS(load_tabulated_kernel(partial, g, t), DimensionError);
}

TEST_CASE("admissibility constant") {
    const Grid g(1.0, 31);
    const TimeGrid t(0.2, 64);
    const CarlemanWeights w = standard_weights(g, 0.2);
    REQUIRE(w.sigma_minus() == doctest::Approx(8.0));

    const Admissibility zero = admissibility_constant(KernelSpec::zero(), w, g, t);
    CHECK(zero.value() == 0.0);
    CHECK_FALSE(zero.diverging);

    const Admissibility decaying =
        admissibility_constant(KernelSpec(GaussianDecayKernel{1.0, 0.2, 10.0}), w, g, t);
    CHECK(std::isfinite(decaying.log_value));
    CHECK_FALSE(decaying.diverging);
    CHECK(std::exp(decaying.log_value_refined - decaying.log_value) < 1.1);

    const Admissibility constant = admissibility_constant(KernelSpec::eigen(1.0, 1, 1.0), w, g, t);
    CHECK(constant.diverging);
}

}  // TEST_SUITE
