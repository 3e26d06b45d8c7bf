#include "pshe/statlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "pshe/rng.hpp"

namespace pshe::stat {

namespace {

constexpr double kKs1 = 1.628;
constexpr std::uint64_t kBootstrapTag = 0x424f4f54ull;

double finite_or_max(double x)
{
    if (std::isnan(x)) {
        return std::numeric_limits<double>::max();
    }
    return std::clamp(x, -std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
}

nlohmann::json to_object(const TestReport& r)
{
    nlohmann::json j;
    j["name"] = r.name;
    j["statistic"] = finite_or_max(r.statistic);
    j["critical"] = finite_or_max(r.critical);
    j["lower"] = r.lower ? nlohmann::json(finite_or_max(*r.lower)) : nlohmann::json(nullptr);
    j["pass"] = r.pass();
    j["informational"] = r.informational;
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["rule"] = r.rule;
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [k, v] : r.details) {
        d[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    }
    j["details"] = d;
    return j;
}

double sample_variance(const std::vector<double>& x)
{
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= n;
    double s = 0.0;
    for (double v : x) {
        s += (v - mean) * (v - mean);
    }
    return s / (n - 1.0);
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double quantile_sorted(const std::vector<double>& s, double p)
{
    const double pos = p * static_cast<double>(s.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double f = pos - static_cast<double>(k);
    return k + 1 < s.size() ? s[k] + f * (s[k + 1] - s[k]) : s[k];
}

}  // namespace

bool TestReport::pass() const
{
    if (informational) {
        return true;
    }
    if (std::isnan(statistic)) {
        return false;
    }
    return statistic <= critical && (!lower || *lower <= statistic);
}

TestReport& TestReport::with(std::string key, double value)
{
    details.emplace_back(std::move(key), value);
    return *this;
}

std::string to_json(const TestReport& r)
{
    return to_object(r).dump(2);
}

std::string to_json(const std::vector<TestReport>& rs)
{
    nlohmann::json j;
    j["pass"] = all_pass(rs);
    j["reports"] = nlohmann::json::array();
    for (const auto& r : rs) {
        j["reports"].push_back(to_object(r));
    }
    return j.dump(2);
}

bool all_pass(const std::vector<TestReport>& rs)
{
    return std::all_of(rs.begin(), rs.end(), [](const TestReport& r) { return r.pass(); });
}

double ks_critical(std::int64_t n)
{
    return kKs1 / std::sqrt(static_cast<double>(n));
}

double ks_critical(std::int64_t n, std::int64_t m)
{
    return kKs1 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

double ks_distance_normal(std::vector<double> x, double mu, double var)
{
    if (!(var > 0.0)) {
        throw std::invalid_argument("ks_normal: variance must be positive");
    }
    std::sort(x.begin(), x.end());
    const double sd = std::sqrt(var);
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = normal_cdf((x[i] - mu) / sd);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_distance(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) {
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            ++j;
        }
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

TestReport ks_normal(const std::vector<double>& samples, double mu, double var, std::string name,
                     std::uint64_t seed)
{
    if (samples.size() < 100) {
        throw std::invalid_argument("ks_normal: at least 100 samples required");
    }
    TestReport r;
    r.name = std::move(name);
    r.statistic = ks_distance_normal(samples, mu, var);
    r.n = static_cast<std::int64_t>(samples.size());
    r.critical = ks_critical(r.n);
    r.seed = seed;
    r.rule = "D_n <= 1.628 / sqrt(n)";
    r.with("mu", mu).with("variance", var);
    return r;
}

TestReport ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                         std::string name, std::uint64_t seed)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: empty sample");
    }
    TestReport r;
    r.name = std::move(name);
    r.statistic = ks_distance(a, b);
    const auto n = static_cast<std::int64_t>(a.size());
    const auto m = static_cast<std::int64_t>(b.size());
    r.n = n + m;
    r.critical = ks_critical(n, m);
    r.seed = seed;
    r.rule = "D_nm <= 1.628 * sqrt((n + m) / (n m))";
    r.with("n_a", static_cast<double>(n)).with("n_b", static_cast<double>(m));
    return r;
}

MeanSe mean_se(const std::vector<double>& x)
{
    MeanSe out;
    out.n = static_cast<std::int64_t>(x.size());
    if (x.empty()) {
        throw std::invalid_argument("mean_se: empty sample");
    }
    for (double v : x) {
        out.mean += v;
    }
    out.mean /= static_cast<double>(out.n);
    if (out.n > 1) {
        out.se = std::sqrt(sample_variance(x) / static_cast<double>(out.n));
    }
    return out;
}

MeanSe covariance(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.size() < 3) {
        throw std::invalid_argument("covariance: need two equal-length samples of size >= 3");
    }
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        p[i] = (a[i] - ma) * (b[i] - mb);
    }
    MeanSe m = mean_se(p);
    m.mean *= n / (n - 1.0);
    m.se *= n / (n - 1.0);
    return m;
}

VarianceCi variance_ci(const std::vector<double>& x, double confidence, std::uint64_t seed,
                       int resamples)
{
    if (x.size() < 30) {
        throw std::invalid_argument("variance_ci: at least 30 samples required");
    }
    if (!(confidence > 0.0 && confidence < 1.0) || resamples < 10) {
        throw std::invalid_argument("variance_ci: bad confidence or resample count");
    }
    VarianceCi out;
    out.n = static_cast<std::int64_t>(x.size());
    out.estimate = sample_variance(x);
    const double alpha = 1.0 - confidence;
    const double dof = static_cast<double>(out.n - 1);
    const boost::math::chi_squared chi(dof);
    out.normal_lower = dof * out.estimate / boost::math::quantile(chi, 1.0 - 0.5 * alpha);
    out.normal_upper = dof * out.estimate / boost::math::quantile(chi, 0.5 * alpha);

    const rng::Philox gen(rng::derive_key(seed, kBootstrapTag));
    std::vector<double> boot(static_cast<std::size_t>(resamples));
    std::vector<double> y(x.size());
    for (int b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const rng::Counter c = gen(static_cast<std::uint64_t>(b), i);
            y[i] = x[static_cast<std::size_t>(rng::uniform53(c[0], c[1]) * x.size())];
        }
        boot[static_cast<std::size_t>(b)] = sample_variance(y);
    }
    std::sort(boot.begin(), boot.end());
    out.bootstrap_lower = quantile_sorted(boot, 0.5 * alpha);
    out.bootstrap_upper = quantile_sorted(boot, 1.0 - 0.5 * alpha);
    out.lower = std::min(out.normal_lower, out.bootstrap_lower);
    out.upper = std::max(out.normal_upper, out.bootstrap_upper);
    return out;
}

SlopeFit loglog_slope(const std::vector<double>& r, const std::vector<double>& v,
                      double confidence)
{
    if (r.size() != v.size() || r.size() < 4) {
        throw std::invalid_argument("loglog_slope: at least 4 (r, v) pairs required");
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0) || !(v[i] > 0.0)) {
            throw std::invalid_argument("loglog_slope: values must be positive");
        }
    }
    SlopeFit f;
    f.n = static_cast<std::int64_t>(r.size());
    const double n = static_cast<double>(f.n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        mx += std::log(r[i]);
        my += std::log(v[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double dx = std::log(r[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v[i]) - my);
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("loglog_slope: radii must not all coincide");
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double e = std::log(v[i]) - f.intercept - f.slope * std::log(r[i]);
        rss += e * e;
    }
    f.se = std::sqrt(rss / (n - 2.0) / sxx);
    const boost::math::students_t t(n - 2.0);
    const double q = boost::math::quantile(t, 0.5 * (1.0 + confidence));
    f.lower = f.slope - q * f.se;
    f.upper = f.slope + q * f.se;
    return f;
}

TestReport trend_to_zero(const std::vector<double>& values, const std::vector<double>& se,
                         std::string name, double z)
{
    if (values.size() < 3 || se.size() != values.size()) {
        throw std::invalid_argument("trend_to_zero: at least 3 values with standard errors");
    }
    auto ratio = [](double excess, double s) {
        if (excess <= 0.0) {
            return s > 0.0 ? excess / s : 0.0;
        }
        return s > 0.0 ? excess / s : std::numeric_limits<double>::infinity();
    };
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double s = std::hypot(se[k], se[k + 1]);
        worst = std::max(worst, ratio(std::abs(values[k + 1]) - std::abs(values[k]), s));
    }
    worst = std::max(worst, ratio(std::abs(values.back()), se.back()));
    TestReport r;
    r.name = std::move(name);
    r.statistic = worst;
    r.critical = z;
    r.n = static_cast<std::int64_t>(values.size());
    r.rule = "max over steps of (|v_k+1| - |v_k|) / hypot(se_k, se_k+1) and |v_last| / se_last "
             "<= z";
    for (std::size_t k = 0; k < values.size(); ++k) {
        r.with("value_" + std::to_string(k), values[k]).with("se_" + std::to_string(k), se[k]);
    }
    return r;
}

TestReport within_se(std::string name, double estimate, double se, double target, double k)
{
    TestReport r;
    r.name = std::move(name);
    const double diff = std::abs(estimate - target);
    r.statistic = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.critical = k;
    r.rule = "|estimate - target| / se <= k";
    r.with("estimate", estimate).with("se", se).with("target", target);
    return r;
}

TestReport within_relative(std::string name, double estimate, double target, double tolerance)
{
    TestReport r;
    r.name = std::move(name);
    r.statistic = target != 0.0 ? std::abs(estimate / target - 1.0)
                                : (estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.critical = tolerance;
    r.rule = "|estimate / target - 1| <= tolerance";
    r.with("estimate", estimate).with("target", target);
    return r;
}

TestReport within_absolute(std::string name, double a, double b, double tolerance)
{
    TestReport r;
    r.name = std::move(name);
    r.statistic = std::abs(a - b);
    r.critical = tolerance;
    r.rule = "|a - b| <= tolerance";
    r.with("a", a).with("b", b);
    return r;
}

}  // namespace pshe::stat
