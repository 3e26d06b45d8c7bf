#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pshe::stat {

//! Verdict of a single statistical check: pass iff lower <= statistic <= critical.
struct TestReport
{
    std::string name;
    double statistic = 0.0;
    double critical = 0.0;
    std::optional<double> lower;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    std::string rule;
    bool informational = false;
    std::vector<std::pair<std::string, double>> details;

    bool pass() const;
    TestReport& with(std::string key, double value);
};

std::string to_json(const TestReport& r);
std::string to_json(const std::vector<TestReport>& rs);
bool all_pass(const std::vector<TestReport>& rs);

//! Asymptotic 1% Kolmogorov-Smirnov critical values.
double ks_critical(std::int64_t n);
double ks_critical(std::int64_t n, std::int64_t m);

double ks_distance_normal(std::vector<double> samples, double mu, double var);
double ks_distance(std::vector<double> a, std::vector<double> b);

TestReport ks_normal(const std::vector<double>& samples, double mu, double var,
                     std::string name = "ks_normal", std::uint64_t seed = 0);
TestReport ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                         std::string name = "ks_two_sample", std::uint64_t seed = 0);

struct MeanSe
{
    double mean = 0.0;
    double se = 0.0;
    std::int64_t n = 0;
};

MeanSe mean_se(const std::vector<double>& samples);

//! Sample covariance with the standard error of the centred cross products.
MeanSe covariance(const std::vector<double>& a, const std::vector<double>& b);

struct VarianceCi
{
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double normal_lower = 0.0;
    double normal_upper = 0.0;
    double bootstrap_lower = 0.0;
    double bootstrap_upper = 0.0;
    std::int64_t n = 0;
    bool contains(double v) const { return lower <= v && v <= upper; }
};

//! Unbiased sample variance with the wider of a chi-square interval and a percentile bootstrap
//! interval (their union).
VarianceCi variance_ci(const std::vector<double>& samples, double confidence = 0.99,
                       std::uint64_t seed = 0, int resamples = 2000);

struct SlopeFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double se = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::int64_t n = 0;
};

//! Least-squares slope of log v against log r with a t-quantile interval from residuals.
SlopeFit loglog_slope(const std::vector<double>& r, const std::vector<double>& v,
                      double confidence = 0.99);

//! Magnitudes must not increase beyond z combined SE between consecutive horizons, and the last
//! value must lie within z SE of zero.
TestReport trend_to_zero(const std::vector<double>& values, const std::vector<double>& se,
                         std::string name = "trend_to_zero", double z = 2.576);

//! |estimate - target| / se <= k.
TestReport within_se(std::string name, double estimate, double se, double target, double k);

//! |estimate / target - 1| <= tolerance.
TestReport within_relative(std::string name, double estimate, double target, double tolerance);

//! |a - b| <= tolerance.
TestReport within_absolute(std::string name, double a, double b, double tolerance);

}  // namespace pshe::stat
