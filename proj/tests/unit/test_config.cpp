#include <gtest/gtest.h>

#include <string>

#include "pshe/config.hpp"

using namespace pshe;
using cli::ExperimentConfig;

TEST(Config, DefaultsAreValid)
{
    EXPECT_TRUE(ExperimentConfig{}.violations().empty());
}

TEST(Config, TomlRoundTripIsExact)
{
    ExperimentConfig a;
    a.subcommand = "fluctuation";
    a.beta = 0.123456789012345;
    a.horizons = {0.5, 1.5};
    a.starts = {0.0, 0.1, 0.2, 1.0, 1.1, 1.2};
    a.backend = polymer::Backend::field;
    a.seed = 18446744073709551557ull;
    a.criteria = {1, 7, 12};
    a.limit_spec = "spec.json";

    ExperimentConfig b;
    EXPECT_TRUE(cli::apply_toml(b, cli::to_toml(a)).empty());
    EXPECT_EQ(cli::to_toml(a), cli::to_toml(b));
    EXPECT_EQ(b.beta, a.beta);
    EXPECT_EQ(b.seed, a.seed);
    EXPECT_EQ(b.starts, a.starts);
    EXPECT_EQ(b.backend, a.backend);
    EXPECT_EQ(b.criteria, a.criteria);
}

TEST(Config, NestedPointArrays)
{
    ExperimentConfig c;
    EXPECT_TRUE(cli::apply_toml(c, "starts = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]").empty());
    EXPECT_EQ(c.starts, (std::vector<double>{0.0, 0.0, 0.0, 2.0, 0.0, 0.0}));
}

TEST(Config, UnknownKeysAndTypeErrorsReported)
{
    ExperimentConfig c;
    const auto v = cli::apply_toml(c, "bta = 0.3\npaths = \"many\"\nbeta = 0.4\n");
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NE(v[0].find("bta"), std::string::npos);
    EXPECT_NE(v[1].find("paths"), std::string::npos);
    EXPECT_EQ(c.beta, 0.4);
}

TEST(Config, ParseErrorCarriesLocation)
{
    ExperimentConfig c;
    try {
        cli::apply_toml(c, "beta 0.3\n");
        FAIL() << "expected a ConfigError";
    } catch (const cli::ConfigError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("config:1:", 0), 0u) << e.what();
    }
    EXPECT_THROW(cli::apply_toml_file(c, "/nonexistent/pshe.toml"), cli::ConfigError);
}

TEST(Config, EnvironmentOverrides)
{
    ExperimentConfig c;
    const auto v = cli::apply_env(c, {{"PSHE_BETA", "0.35"},
                                      {"PSHE_HORIZONS", "1,2,4"},
                                      {"PSHE_POINTS", "0,0,0;3,0,0"},
                                      {"PSHE_BACKEND", "field"},
                                      {"PSHE_NOPE", "1"},
                                      {"HOME", "/root"}});
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("PSHE_NOPE"), std::string::npos);
    EXPECT_EQ(c.beta, 0.35);
    EXPECT_EQ(c.horizons, (std::vector<double>{1.0, 2.0, 4.0}));
    EXPECT_EQ(c.points, (std::vector<double>{0.0, 0.0, 0.0, 3.0, 0.0, 0.0}));
    EXPECT_EQ(c.backend, polymer::Backend::field);
    EXPECT_FALSE(cli::apply_env(c, {{"PSHE_PATHS", "x"}}).empty());
}

TEST(Config, ViolationsListEveryField)
{
    ExperimentConfig c;
    c.subcommand = "nope";
    c.beta = -1.0;
    c.horizons = {1.0, 0.5};
    c.replicas = 0;
    const auto v = c.violations();
    EXPECT_GE(v.size(), 4u);
    c = ExperimentConfig{};
    c.horizons = {1.0005};
    EXPECT_FALSE(c.violations().empty());
}

TEST(Config, PolymerView)
{
    ExperimentConfig c;
    c.paths = 7;
    const auto p = c.polymer();
    EXPECT_EQ(p.paths_per_start, 7);
    EXPECT_EQ(p.horizons, c.horizons);
    EXPECT_TRUE(p.violations().empty());
}
