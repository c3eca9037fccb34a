#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "banach/cli.hpp"
#include "banach/errors.hpp"

namespace cli = banach::cli;

int main(int argc, char** argv) {
    CLI::App app{"Modulus, duality and criterion checks for section spaces of measurable Banach bundles"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string grid;
    std::uint64_t seed = 0;

    for (auto name : {"modulus", "suite", "dual-check", "criterion"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides $BANACHLAB_OUT and the config)");
        sub->add_option("--seed", seed, "overrides the configured seed");
        sub->add_option("--grid", grid, "epsilon grid as start:stop:step");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }

    const auto* sub = app.get_subcommands().front();
    try {
        auto config = cli::load_config(config_path);
        config.command = cli::parse_command(sub->get_name());
        if (sub->count("--seed")) {
            config.seed = seed;
            config.recipe.seed = seed;
        }
        if (sub->count("--grid")) config.epsilons = cli::parse_grid(grid);
        if (!out_dir.empty()) {
            config.out = out_dir;
        } else if (const char* env = std::getenv(cli::kOutputEnv); env && *env) {
            config.out = env;
        }

        const auto result = cli::run(config, config.out);
        for (const auto& r : result.reports) {
            std::cout << fmt::format("{:<16} {}  rows={} discrepancies={}{}\n", r.suite,
                                     banach::verdict_name(r.verdict), r.rows.size(), r.discrepancies(),
                                     r.vacuous ? " (vacuous)" : "");
        }
        std::cout << fmt::format("wrote {} files to {}\n", result.files.size(), config.out);
        return result.exit_code;
    } catch (const banach::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kExitConfig;
    } catch (const banach::StructuralError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kExitConfig;
    } catch (const banach::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitUnexpected;
    }
}
