#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pshe/experiment.hpp"

using namespace pshe;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("pshe-test-" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Experiment, InvalidConfigWritesNothing)
{
    cli::ExperimentConfig c;
    c.beta = -0.5;
    c.paths = 0;
    c.out = fresh_dir("invalid").string();
    std::ostringstream log, err;
    const auto o = experiment::run(c, log, err);
    EXPECT_EQ(o.exit_code, experiment::invalid_config);
    EXPECT_FALSE(fs::exists(c.out));
    EXPECT_NE(err.str().find("beta"), std::string::npos);
    EXPECT_NE(err.str().find("paths"), std::string::npos);
}

TEST(Experiment, MissingLimitSpecIsConfigError)
{
    cli::ExperimentConfig c;
    c.subcommand = "limit-sample";
    c.limit_spec = "/nonexistent/spec.json";
    c.out = fresh_dir("nospec").string();
    std::ostringstream log, err;
    EXPECT_EQ(experiment::run(c, log, err).exit_code, experiment::invalid_config);
    EXPECT_FALSE(fs::exists(c.out));
}

TEST(Experiment, LimitSampleWritesOutputs)
{
    cli::ExperimentConfig c;
    c.subcommand = "limit-sample";
    c.limit_spec = R"({"field": "H", "d": 3, "gamma_sq": 1.0,
        "points": [{"t": 1.0, "x": [0, 0, 0]}, {"t": 1.0, "x": [1, 0, 0]}]})";
    c.limit_samples = 4000;
    c.out = fresh_dir("limit").string();
    std::ostringstream log, err;
    const auto o = experiment::run(c, log, err);
    EXPECT_EQ(o.exit_code, experiment::ok) << err.str();
    for (const char* f : {"config.toml", "reports.json", "manifest.json", "limit_samples.csv"}) {
        EXPECT_TRUE(fs::exists(fs::path(c.out) / f)) << f;
    }
    std::ifstream in(fs::path(c.out) / "manifest.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["exit_code"], 0);
    EXPECT_EQ(j["subcommand"], "limit-sample");

    cli::ExperimentConfig back;
    std::ifstream t(fs::path(c.out) / "config.toml");
    std::stringstream ss;
    ss << t.rdbuf();
    EXPECT_TRUE(cli::apply_toml(back, ss.str()).empty());
    EXPECT_EQ(cli::to_toml(back), cli::to_toml(c));
}

TEST(Experiment, BudgetExhaustionExitCode)
{
    cli::ExperimentConfig c;
    c.subcommand = "simulate-z";
    c.beta = 0.0;
    c.paths = 8;
    c.dt = 0.01;
    c.horizons = {1.0};
    c.replicas = 50;
    c.max_paths = 80;
    c.out = fresh_dir("budget").string();
    std::ostringstream log, err;
    const auto o = experiment::run(c, log, err);
    EXPECT_EQ(o.exit_code, experiment::budget_exhausted);
    std::ifstream in(fs::path(c.out) / "manifest.json");
    EXPECT_TRUE(nlohmann::json::parse(in)["budget_exhausted"].get<bool>());
}

TEST(Experiment, StationaryCheckPasses)
{
    cli::ExperimentConfig c;
    c.subcommand = "stationary-check";
    c.beta = 0.0;
    c.out = fresh_dir("stationary").string();
    std::ostringstream log, err;
    EXPECT_EQ(experiment::run(c, log, err).exit_code, experiment::ok) << err.str();
}
