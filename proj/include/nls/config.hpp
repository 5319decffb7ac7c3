#pragma once

#include "nls/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nls {

enum class ExperimentKind { follower, leader, semilinear, boundary, observability };
enum class ChannelKind { distributed, boundary };

std::string to_string(ExperimentKind kind);
std::string to_string(ChannelKind kind);

/// Data generator: "zero", "eigenmode k", "bump c w" (Gaussian) or "file path".
/// Space-time data built from a generator are constant in time.
struct DataSpec {
    std::string kind = "zero";
    int mode = 1;
    double center = 0.5;
    double width = 0.1;
    std::string path;

    static DataSpec parse(const std::string& text);
    std::string text() const;
    bool operator==(const DataSpec&) const = default;
};

/// Samples a generator on every node (boundary nodes are zeroed).
Vector generate(const DataSpec& spec, const Grid& grid, const std::string& base_dir = "");

struct ScenarioConfig {
    // [experiment]
    ExperimentKind kind = ExperimentKind::leader;
    ChannelKind channel = ChannelKind::distributed;
    std::uint64_t seed = 1;
    std::string output = "out";
    // [grid]
    int n = 63;
    int n_steps = 64;
    double length = 1.0;
    double horizon = 0.2;
    // [regions]
    Interval omega{};
    std::optional<Interval> omega_prime;
    std::optional<Interval> follower;
    Interval target_region{};
    Side gamma_side = Side::right;
    double gamma_profile = 1.0;
    // [control]
    double mu = 1e2;
    double epsilon = 1e-4;
    std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    double tol = 1e-8;
    int max_iter = 500;
    double picard_tol = 1e-12;
    int max_outer = 50;
    // [weights]
    double s = 2.0;
    double lambda = 1.0;
    double eta0_max = 0.69314718055994531;   // ln 2
    // [kernel]
    std::string kernel_type = "zero";   // zero | separable | gaussian_decay | tabulated
    double kernel_amplitude = 1.0;
    int kernel_mode = 1;
    double kernel_width = 0.2;
    double kernel_decay = 0.0;
    std::string kernel_file;
    // [nonlinearity]
    std::string nonlinearity = "zero";
    double nonlinearity_amplitude = 0.0;
    std::string placement = "reaction";   // reaction | kernel
    // [data]
    DataSpec initial{"eigenmode", 1, 0.5, 0.1, ""};
    DataSpec target{};
    DataSpec initial_reference{};
    DataSpec leader{};
    int samples = 50;
    int modes = 16;

    /// Directory of the config file, used to resolve relative data paths.
    std::string base_dir;

    bool operator==(const ScenarioConfig&) const = default;

    Interval omega_prime_or_default() const;
};

/// Parses `key = value` lines grouped under `[section]` headers; '#' starts
/// a comment. Unknown sections or keys, malformed values, missing required
/// keys and violated geometric hypotheses throw ConfigError.
ScenarioConfig parse_config(std::istream& in, const std::string& base_dir = "");
ScenarioConfig parse_config_file(const std::string& path);

/// Writes every key, so parse_config(emit_config(c)) == c.
std::string emit_config(const ScenarioConfig& config);

/// Checks ranges and region hypotheses; throws ConfigError.
void validate(const ScenarioConfig& config);

/// Text for --help: every section and key with its default.
std::string config_reference();

/// Parses "1e-1..1e-5" (one value per decade) or a space/comma separated list.
std::vector<double> parse_eps_range(const std::string& text);

}  // namespace nls
