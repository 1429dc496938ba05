#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "app/commands.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Analysis and integration of time-optimal extremals of affine control systems"};
    cli.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> chart_radius;
    std::optional<double> eps_switch;

    const char* verbs[][2] = {
        {"classify", "Bracket data, membership verdict and scenario at the anchor"},
        {"integrate", "Integrate an extremal and report switching events"},
        {"sphere", "Integrate the flow on the blow-up sphere and its Lorentz lift"},
        {"validate", "Cross-check analytic predictions against the oracles"},
        {"oracle", "Run the brute-force oracles on the configured data"},
    };
    for (const auto& v : verbs) {
        CLI::App* sub = cli.add_subcommand(v[0], v[1]);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "Directory for reports and data files");
        sub->add_option("--seed", seed, "Random seed (overrides the config)");
        sub->add_option("--chart-radius", chart_radius, "Chart radius (overrides the config)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--eps-switch", eps_switch, "Switching threshold (overrides the config)")
            ->check(CLI::PositiveNumber);
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : extremal::app::kInputError;
    }

    extremal::app::RunConfig config;
    try {
        config = extremal::app::load_config(config_path);
    } catch (const extremal::app::ConfigError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return extremal::app::kInputError;
    }
    if (seed) {
        config.seed = *seed;
    }
    if (chart_radius) {
        config.integrator.chart_radius = *chart_radius;
    }
    if (eps_switch) {
        config.integrator.eps_switch = *eps_switch;
    }

    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) {
        out = out_dir;
    }
    const std::string verb = cli.get_subcommands().front()->get_name();
    return extremal::app::run_command(verb, config, std::cout, std::cerr, out);
}
