#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pshe/records.hpp"

using namespace pshe;

TEST(Format, ShortestRoundTrip)
{
    EXPECT_EQ(records::format(0.1), "0.1");
    EXPECT_EQ(records::format(1e-300), "1e-300");
    EXPECT_EQ(records::format(std::nan("")), "nan");
    EXPECT_EQ(records::format(-INFINITY), "-inf");
    const double x = 0.1 + 0.2;
    EXPECT_EQ(std::stod(records::format(x)), x);
}

TEST(SamplesCsv, OneRowPerHorizonAndStart)
{
    polymer::PolymerSample s;
    s.replica = 4;
    s.d = 3;
    s.beta = 0.2;
    s.horizons = {1.0, 2.0};
    s.starts = {0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    s.z = {1.5, 0.5, 2.0, 1.0};
    const auto csv = records::samples_csv({s});
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "replica,backend,beta,T,x0,x1,x2,Z,logZ,max_jitter,windows,largest_component,"
                    "wrap_events");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 4);
    EXPECT_NE(csv.find("4,gram,0.2,2,1,0,0,1,0,"), std::string::npos);
}

TEST(LimitSpec, JsonRoundTrip)
{
    const std::string text = R"({"field": "Hst", "d": 3, "gamma_sq": 2.0, "smoothing": 0.1,
        "points": [{"t": 1.0, "x": [0, 0, 0]}, {"t": 2.0, "x": [1, 0, 0]}]})";
    const auto s = records::parse_limit_spec(text);
    EXPECT_EQ(s.field, limits::Field::Hst);
    EXPECT_EQ(s.amp_sq, 2.0);
    EXPECT_EQ(s.smoothing.variance, 0.1);
    const auto back = records::parse_limit_spec(records::limit_spec_json(s));
    EXPECT_EQ(back.covariance, s.covariance);
    EXPECT_THROW(records::parse_limit_spec("{\"field\": \"H\"}"), std::invalid_argument);
    EXPECT_THROW(records::parse_limit_spec("not json"), std::invalid_argument);
}

TEST(Manifest, CarriesVersionsAndSchemas)
{
    records::Manifest m;
    m.subcommand = "constants";
    m.seed = 9;
    m.files = {"constants.csv"};
    const auto j = nlohmann::json::parse(records::manifest_json(m));
    EXPECT_EQ(j["seed"], 9);
    EXPECT_TRUE(j["versions"].contains("boost"));
    EXPECT_TRUE(j["versions"].contains("eigen"));
    EXPECT_EQ(j["schema_versions"]["samples.csv"], 1);
}
