#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

#include "pshe/rng.hpp"
#include "pshe/statlab.hpp"

using namespace pshe;

namespace {

std::vector<double> normals(int n, std::uint64_t seed, double sd = 1.0)
{
    rng::NormalStream s(seed, 0);
    std::vector<double> x(n);
    for (double& v : x) {
        v = sd * s();
    }
    return x;
}

}  // namespace

TEST(Ks, DistanceAgainstHandComputation)
{
    // Samples {-1, 1} against N(0, 4): the largest gap is Phi(-1/2) at either end.
    const double phi_half = 0.5 * std::erfc(0.5 / std::sqrt(2.0));
    EXPECT_NEAR(stat::ks_distance_normal({-1.0, 1.0}, 0.0, 4.0), phi_half, 1e-12);
    EXPECT_NEAR(phi_half, 0.3085375387, 1e-9);
    EXPECT_NEAR(stat::ks_distance({1.0, 2.0, 3.0}, {2.5, 3.5}), 2.0 / 3.0, 1e-15);
}

TEST(Ks, CriticalValue)
{
    EXPECT_NEAR(stat::ks_critical(100), 0.1628, 1e-4);
    EXPECT_NEAR(stat::ks_critical(100, 100), 1.628 * std::sqrt(0.02), 1e-3);
}

TEST(Ks, AcceptsMatchingAndRejectsWrongVariance)
{
    const auto x = normals(2000, 4, 2.0);
    EXPECT_TRUE(stat::ks_normal(x, 0.0, 4.0).pass());
    EXPECT_FALSE(stat::ks_normal(x, 0.0, 1.0).pass());
    EXPECT_TRUE(stat::ks_two_sample(x, normals(1500, 5, 2.0)).pass());
    EXPECT_THROW(stat::ks_normal(normals(50, 1), 0.0, 1.0), std::invalid_argument);
}

TEST(MeanSe, Exact)
{
    const auto m = stat::mean_se({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt((5.0 / 3.0) / 4.0), 1e-15);
    const auto c = stat::covariance({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0});
    EXPECT_NEAR(c.mean, 2.0, 1e-15);
}

TEST(VarianceCi, LognormalContainsTruth)
{
    const double s = 0.5;
    auto x = normals(5000, 12);
    for (double& v : x) {
        v = std::exp(s * v);
    }
    const double truth = (std::exp(s * s) - 1.0) * std::exp(s * s);
    const auto ci = stat::variance_ci(x, 0.99, 3);
    EXPECT_TRUE(ci.contains(truth)) << ci.lower << " " << ci.upper;
    EXPECT_LE(ci.lower, ci.normal_lower);
    EXPECT_GE(ci.upper, ci.bootstrap_upper);
}

TEST(LogLogSlope, ExactPowerLaw)
{
    std::vector<double> r{1.0, 2.0, 4.0, 8.0}, v;
    for (double x : r) {
        v.push_back(3.0 * std::pow(x, -1.0));
    }
    const auto f = stat::loglog_slope(r, v);
    EXPECT_NEAR(f.slope, -1.0, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
}

TEST(TrendToZero, DecreasingPassesGrowingFails)
{
    EXPECT_TRUE(stat::trend_to_zero({1.0, 0.5, 0.1}, {0.1, 0.1, 0.1}).pass());
    EXPECT_FALSE(stat::trend_to_zero({0.1, 0.5, 1.0}, {0.1, 0.1, 0.1}).pass());
    EXPECT_FALSE(stat::trend_to_zero({1.0, 0.9, 0.8}, {0.01, 0.01, 0.01}).pass());
}

TEST(Reports, RulesAndJson)
{
    EXPECT_TRUE(stat::within_se("a", 1.1, 0.1, 1.0, 2.0).pass());
    EXPECT_FALSE(stat::within_se("a", 1.5, 0.1, 1.0, 2.0).pass());
    EXPECT_TRUE(stat::within_relative("b", 1.1, 1.0, 0.15).pass());
    EXPECT_FALSE(stat::within_absolute("c", 1.0, 1.1, 0.05).pass());

    stat::TestReport r;
    r.name = "interval";
    r.lower = 1.0;
    r.statistic = 0.5;
    r.critical = 2.0;
    EXPECT_FALSE(r.pass());
    r.informational = true;
    EXPECT_TRUE(r.pass());

    auto n = stat::within_se("nan", std::nan(""), 1.0, 0.0, 1.0);
    EXPECT_FALSE(n.pass());
    const auto j = nlohmann::json::parse(stat::to_json(n));
    EXPECT_EQ(j["name"], "nan");
    EXPECT_FALSE(j["pass"].get<bool>());
}
