#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ergodic/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Solver and property checks for the viscous ergodic problem"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    int workers = 0;
    std::uint64_t seed = 0;
    for (const char* name : {"solve", "sweep", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out, "output directory (overrides run.output)");
        sub->add_option("--workers", workers, "concurrent rows or checks")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "seed for randomized initial guesses");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : ergodic::kExitConfig;
    }
    const std::string mode = app.get_subcommands().front()->get_name();

    ergodic::ExperimentConfig config;
    try {
        config = ergodic::ExperimentConfig::load(config_path);
    } catch (const ergodic::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ergodic::kExitConfig;
    }
    if (ergodic::to_string(config.mode) != mode) {
        std::cerr << "config error: run.mode is '" << ergodic::to_string(config.mode) << "' but the subcommand is '"
                  << mode << "'\n";
        return ergodic::kExitConfig;
    }
    if (workers > 0) {
        config.workers = workers;
    }
    if (app.get_subcommands().front()->count("--seed") > 0) {
        config.seed = seed;
    }
    const std::filesystem::path dir = out.empty() ? std::filesystem::path(config.output) : std::filesystem::path(out);
    return ergodic::run(config, dir);
}
