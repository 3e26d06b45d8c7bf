#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pshe/config.hpp"
#include "pshe/experiment.hpp"

namespace {

std::string subcommand_help()
{
    std::string s = "Subcommand:";
    for (const auto& c : pshe::cli::subcommands()) {
        s += " " + c;
    }
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mollified stochastic heat equation and directed polymer lab"};
    app.set_version_flag("--version", PSHE_VERSION);

    std::optional<std::string> subcommand;
    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::int64_t> replicas;
    std::optional<std::string> backend;
    std::optional<int> threads;
    std::optional<std::string> profile;

    app.add_option("subcommand", subcommand, subcommand_help());
    app.add_option("--config", config_file, "TOML configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--out", out, "Output directory");
    app.add_option("--replicas", replicas, "Number of environment replicas");
    app.add_option("--backend", backend, "Simulation backend")
        ->check(CLI::IsMember({"gram", "field"}));
    app.add_option("--threads", threads, "Worker threads");
    app.add_option("--profile", profile, "Suite profile")->check(CLI::IsMember({"desk", "full"}));
    app.footer("Precedence: flags, then PSHE_<KEY> environment variables, then --config, then "
               "defaults.\nExit codes: 0 pass, 1 check failed, 2 invalid configuration, "
               "3 budget exhausted, 4 runtime error.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return pshe::experiment::invalid_config;
    }

    pshe::cli::ExperimentConfig cfg;
    std::vector<std::string> problems;
    try {
        if (config_file) {
            const auto v = pshe::cli::apply_toml_file(cfg, *config_file);
            problems.insert(problems.end(), v.begin(), v.end());
        }
        const auto v = pshe::cli::apply_env(cfg, pshe::cli::process_env());
        problems.insert(problems.end(), v.begin(), v.end());
    } catch (const pshe::cli::ConfigError& e) {
        std::cerr << "config: " << e.what() << '\n';
        return pshe::experiment::invalid_config;
    }
    if (subcommand) {
        cfg.subcommand = *subcommand;
    }
    if (seed) {
        cfg.seed = *seed;
    }
    if (out) {
        cfg.out = *out;
    }
    if (replicas) {
        cfg.replicas = *replicas;
    }
    if (backend) {
        cfg.backend = pshe::polymer::parse_backend(*backend);
    }
    if (threads) {
        cfg.threads = *threads;
    }
    if (profile) {
        cfg.profile = *profile;
    }
    if (!problems.empty()) {
        for (const auto& p : problems) {
            std::cerr << "config: " << p << '\n';
        }
        return pshe::experiment::invalid_config;
    }
    return pshe::experiment::run(cfg, std::cout, std::cerr).exit_code;
}
