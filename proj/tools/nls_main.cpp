#include "nls/config.hpp"
#include "nls/errors.hpp"
#include "nls/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int finish(const nls::ScenarioOutcome& out, const std::string& dir) {
    std::cout << out.report;
    std::cout << "outputs written to " << dir << '\n';
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Leader-follower controllability experiments for nonlocal parabolic equations"};
    app.footer("Scenario file keys and defaults:\n" + nls::config_reference() +
               "\nOutputs go to [experiment] output, below $NLS_OUTPUT_ROOT when set.\n"
               "Exit codes: 0 success, 1 configuration error, 2 non-convergence.");
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string eps_text = "1e-1..1e-5";
    int samples = 50;

    auto* run = app.add_subcommand("run", "run the experiment described by a scenario file");
    run->add_option("config", config_path, "scenario file")->required();
    run->add_option("-o,--output", out_override, "output directory (overrides the scenario)");

    auto* check = app.add_subcommand("check", "validate a scenario file and print it normalised");
    check->add_option("config", config_path, "scenario file")->required();

    auto* sweep = app.add_subcommand("sweep", "epsilon sweep of the leader problem");
    sweep->add_option("config", config_path, "scenario file")->required();
    sweep->add_option("--eps", eps_text, "list or decade range such as 1e-1..1e-5")
        ->capture_default_str();
    sweep->add_option("-o,--output", out_override, "output directory (overrides the scenario)");

    auto* probe = app.add_subcommand("probe-observability", "sample the observability ratio");
    probe->add_option("config", config_path, "scenario file")->required();
    probe->add_option("--samples", samples, "number of random terminal data")->capture_default_str();
    probe->add_option("-o,--output", out_override, "output directory (overrides the scenario)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nls::kExitConfig;
    }

    try {
        const nls::ScenarioConfig config = nls::parse_config_file(config_path);
        if (check->parsed()) {
            std::cout << nls::emit_config(config);
            return nls::kExitOk;
        }
        const std::string dir = out_override.empty() ? nls::resolve_output_dir(config) : out_override;
        if (run->parsed()) return finish(nls::run_scenario(config, dir), dir);
        if (sweep->parsed()) return finish(nls::run_sweep(config, nls::parse_eps_range(eps_text), dir), dir);
        if (probe->parsed()) return finish(nls::run_probe(config, samples, dir), dir);
    } catch (const nls::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return nls::kExitConfig;
    } catch (const nls::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return nls::kExitNonConvergence;
    }
    return nls::kExitConfig;
}
