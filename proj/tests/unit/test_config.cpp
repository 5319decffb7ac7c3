#include "nls/config.hpp"
#include "nls/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

using namespace nls;

namespace {

const char* kMinimal = R"(
[experiment]
kind = leader

[grid]
n = 15
n_steps = 16

[regions]
omega = 0.1 0.4
follower = 0.6 0.8
target_region = 0.2 0.9
)";

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal file takes the documented defaults") {
    const ScenarioConfig c = parse(kMinimal);
    CHECK(c.kind == ExperimentKind::leader);
    CHECK(c.channel == ChannelKind::distributed);
    CHECK(c.n == 15);
    CHECK(c.n_steps == 16);
    CHECK(c.mu == 1e2);
    CHECK(c.epsilon == 1e-4);
    CHECK(c.s == 2.0);
    CHECK(c.lambda == 1.0);
    CHECK(c.horizon == 0.2);
    CHECK(c.length == 1.0);
    const Interval wp = c.omega_prime_or_default();
    CHECK(wp.a == doctest::Approx(0.175));
    CHECK(wp.b == doctest::Approx(0.325));
}

TEST_CASE("disjoint omega and O_d are rejected") {
    std::string text = kMinimal;
    text.replace(text.find("omega = 0.1 0.4"), 15, "omega = 0.1 0.3");
    text.replace(text.find("target_region = 0.2 0.9"), 23, "target_region = 0.5 0.7");
    const std::string msg = error_of(text);
    CHECK(msg.find("omega and O_d are disjoint") != std::string::npos);
}

TEST_CASE("emitted config parses back to the same value") {
    ScenarioConfig c = parse(std::string(kMinimal) +
                             "\n[kernel]\ntype = gaussian_decay\namplitude = 2.5\ndecay = 0.01\n"
                             "[control]\neps_list = 1e-1..1e-4\nmu = 37.5\n"
                             "[data]\ninitial = bump 0.3 0.05\ntarget = eigenmode 3\n");
    const ScenarioConfig back = parse(emit_config(c));
    CHECK(back == c);
    CHECK(emit_config(back) == emit_config(c));
}

TEST_CASE("malformed files") {
    CHECK(error_of(std::string(kMinimal) + "colour = red\n").find("unknown key") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "[extras]\n").find("unknown section") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "n = 31\n").find("unknown key") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "[grid]\nn = 31\n").find("duplicate key") != std::string::npos);
    std::string missing = kMinimal;
    missing.erase(missing.find("n_steps = 16"), 12);
    CHECK(error_of(missing).find("missing required key 'grid.n_steps'") != std::string::npos);
    std::string bad = kMinimal;
    bad.replace(bad.find("n = 15"), 6, "n = 1x");
    CHECK(error_of(bad).find("malformed integer") != std::string::npos);
    std::string reversed = kMinimal;
    reversed.replace(reversed.find("omega = 0.1 0.4"), 15, "omega = 0.4 0.1");
    CHECK(error_of(reversed).find("a < b") != std::string::npos);
    std::string overlap = kMinimal;
    overlap.replace(overlap.find("follower = 0.6 0.8"), 18, "follower = 0.3 0.8");
    CHECK(error_of(overlap).find("must be disjoint") != std::string::npos);
}

TEST_CASE("epsilon ranges") {
    const std::vector<double> r = parse_eps_range("1e-1..1e-5");
    REQUIRE(r.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(r[i] == doctest::Approx(std::pow(10.0, -1 - i)).epsilon(1e-14));
    const std::vector<double> up = parse_eps_range("1e-3..1e-1");
    REQUIRE(up.size() == 3);
    CHECK(up.back() == doctest::Approx(0.1));
    CHECK(parse_eps_range("0.5, 0.25 0.125") == std::vector<double>{0.5, 0.25, 0.125});
    CHECK_THROWS_AS(parse_eps_range(""), ConfigError);
    CHECK_THROWS_AS(parse_eps_range("0..1e-3"), ConfigError);
}

TEST_CASE("data generators") {
    const Grid g(1.0, 9);
    const Vector e = generate(DataSpec::parse("eigenmode 2"), g);
    CHECK(e[0] == 0.0);
    CHECK(e[g.nodes() - 1] == 0.0);
    CHECK(e[3] == doctest::Approx(std::sin(2.0 * std::numbers::pi * g.x(3))));
    const Vector b = generate(DataSpec::parse("bump 0.5 0.1"), g);
    CHECK(b[5] == doctest::Approx(1.0));
    CHECK(generate(DataSpec::parse("zero"), g).isZero(0.0));
    CHECK(DataSpec::parse(DataSpec::parse("bump 0.25 0.05").text()) == DataSpec::parse("bump 0.25 0.05"));
    CHECK_THROWS_AS(DataSpec::parse("eigenmode 0"), ConfigError);
    CHECK_THROWS_AS(DataSpec::parse("spline"), ConfigError);
}

}  // TEST_SUITE
