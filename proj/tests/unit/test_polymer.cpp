#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "pshe/polymer.hpp"

using namespace pshe;
using polymer::Backend;
using polymer::PolymerConfig;

namespace {

const kernels::Mollifier& mollifier()
{
    static const kernels::Mollifier m = kernels::make_mollifier(3);
    return m;
}

const kernels::CovarianceKernel& kernel()
{
    static const kernels::CovarianceKernel v = kernels::autocorrelate(mollifier());
    return v;
}

PolymerConfig small(Backend b, double beta)
{
    PolymerConfig c;
    c.beta = beta;
    c.dt = 0.01;
    c.paths_per_start = 8;
    c.horizons = {0.5, 1.0};
    c.starts = {0.0, 0.0, 0.0, 0.5, 0.0, 0.0};
    c.backend = b;
    c.seed = 42;
    return c;
}

std::vector<polymer::PolymerSample> run(const PolymerConfig& c, std::int64_t replicas,
                                        int threads = 1)
{
    polymer::ReplicaOptions o;
    o.replicas = replicas;
    o.threads = threads;
    o.lattice_dx = 0.25;
    return polymer::simulate(c, mollifier(), kernel(), o);
}

}  // namespace

TEST(PolymerConfig, Violations)
{
    PolymerConfig c;
    c.d = 2;
    c.beta = -1.0;
    c.paths_per_start = 0;
    c.horizons = {1.0, 0.5};
    c.starts = {0.0};
    EXPECT_GE(c.violations().size(), 5u);
    EXPECT_TRUE(small(Backend::gram, 0.2).violations().empty());
    EXPECT_EQ(polymer::parse_backend("field"), Backend::field);
    EXPECT_THROW(polymer::parse_backend("lattice"), std::invalid_argument);
}

TEST(Polymer, DegenerateAtBetaZero)
{
    for (Backend b : {Backend::gram, Backend::field}) {
        for (const auto& s : run(small(b, 0.0), 3)) {
            for (double z : s.z) {
                EXPECT_EQ(z, 1.0);
            }
            EXPECT_EQ(s.log_at(1, 1), 0.0);
        }
    }
}

TEST(Polymer, ReproducibleAcrossThreadCounts)
{
    for (Backend b : {Backend::gram, Backend::field}) {
        const auto a = run(small(b, 0.3), 4, 1);
        const auto c = run(small(b, 0.3), 4, 3);
        ASSERT_EQ(a.size(), c.size());
        for (std::size_t r = 0; r < a.size(); ++r) {
            EXPECT_EQ(a[r].z, c[r].z);
            EXPECT_EQ(a[r].replica, static_cast<std::int64_t>(r));
        }
        EXPECT_NE(a[0].z, a[1].z);
    }
}

TEST(Polymer, MeanOneGram)
{
    PolymerConfig c = small(Backend::gram, 0.3);
    c.paths_per_start = 16;
    const auto s = run(c, 200);
    double m = 0.0, m2 = 0.0;
    for (const auto& x : s) {
        m += x.at(1, 0);
        m2 += x.at(1, 0) * x.at(1, 0);
    }
    const double n = static_cast<double>(s.size());
    m /= n;
    const double se = std::sqrt((m2 / n - m * m) / (n - 1.0));
    EXPECT_NEAR(m, 1.0, 5.0 * se);
}

TEST(Polymer, PairMomentMatchesReplicaAverage)
{
    // E[Z_T(x) Z_T(y)] two ways: replica average of products, and the path-law estimator.
    PolymerConfig c = small(Backend::gram, 0.6);
    c.paths_per_start = 16;
    c.starts = {0.0, 0.0, 0.0, 0.3, 0.0, 0.0};
    const int n = 300;
    std::vector<double> direct, path_law;
    for (int r = 0; r < n; ++r) {
        const auto g = polymer::realize_gram(c, kernel(), r);
        direct.push_back(g.sample.at(1, 0) * g.sample.at(1, 1));
        path_law.push_back(polymer::integrated_pair_moment(g, 1, 0, 1));
    }
    auto mean_se = [](const std::vector<double>& v) {
        double m = 0.0, m2 = 0.0;
        for (double x : v) {
            m += x;
            m2 += x * x;
        }
        m /= v.size();
        return std::pair{m, std::sqrt((m2 / v.size() - m * m) / (v.size() - 1.0))};
    };
    const auto [a, sa] = mean_se(direct);
    const auto [b, sb] = mean_se(path_law);
    EXPECT_GT(b, 1.0);
    EXPECT_NEAR(a, b, 5.0 * std::hypot(sa, sb));
}

TEST(Polymer, IncrementMomentVanishesAtBetaZero)
{
    PolymerConfig c = small(Backend::gram, 0.0);
    const auto g = polymer::realize_gram(c, kernel(), 0);
    EXPECT_EQ(polymer::integrated_increment_moment(g, 0, 1, 0, 1, 0, 1), 0.0);
    EXPECT_EQ(polymer::bracket_derivative(g, kernel(), 1, 0, 0), 0.0);
}

TEST(GProcess, HandBuiltSamples)
{
    polymer::PolymerSample s;
    s.d = 3;
    s.horizons = {4.0, 8.0, 16.0};
    s.starts = {0.0, 0.0, 0.0};
    s.z = {2.0, 3.0, 1.0};
    const auto g = polymer::g_process({s}, 4.0, {1.0, 2.0, 4.0}, 0.1);
    const double scale = std::pow(4.0, 0.25);
    ASSERT_EQ(g.values.size(), 3u);
    EXPECT_EQ(g.values[0], 0.0);
    EXPECT_NEAR(g.values[1], scale * 0.5, 1e-15);
    EXPECT_NEAR(g.values[2], scale * -0.5, 1e-15);
    // g(4) = 2 C0 (1 - 4^{-1/2}) = C0 in d = 3
    EXPECT_NEAR(g.target[2], 0.1, 1e-15);
    EXPECT_THROW(polymer::g_process({s}, 4.0, {2.0, 4.0}, 0.1), std::invalid_argument);
}

TEST(Fluctuation, ConfigAndSamples)
{
    PolymerConfig base = small(Backend::gram, 0.2);
    const std::vector<double> pts{0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    const auto c = polymer::fluctuation_config(base, 4.0, 64.0, {1.0, 2.0}, pts);
    EXPECT_EQ(c.horizons, (std::vector<double>{4.0, 8.0, 64.0}));
    EXPECT_EQ(c.starts, (std::vector<double>{0.0, 0.0, 0.0, 2.0, 0.0, 0.0}));
    EXPECT_THROW(polymer::fluctuation_config(base, 4.0, 32.0, {1.0}, pts), std::invalid_argument);

    polymer::PolymerSample s;
    s.d = 3;
    s.horizons = c.horizons;
    s.starts = c.starts;
    s.z = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const auto f = polymer::fluctuation_samples({s}, 4.0, 64.0, {1.0, 2.0}, pts);
    const double scale = std::pow(4.0, 0.25);
    EXPECT_NEAR(f.at(0, 0, 0), scale * std::log(5.0 / 1.0), 1e-14);
    EXPECT_NEAR(f.at(0, 0, 1), scale * std::log(6.0 / 2.0), 1e-14);
    EXPECT_NEAR(f.at(0, 1, 0), scale * std::log(5.0 / 3.0), 1e-14);
    EXPECT_NEAR(f.at(0, 1, 1), scale * std::log(6.0 / 4.0), 1e-14);

    const auto avg = polymer::averaged_fluctuation(f, 1, {0.25, 0.75});
    EXPECT_NEAR(avg[0], 0.25 * f.at(0, 1, 0) + 0.75 * f.at(0, 1, 1), 1e-15);
}

TEST(BumpGrid, RiemannSumMatchesIntegral)
{
    const double radius = 1.0;
    const double mass = oracle::simpson(
        [&](double r) {
            const double u = r / radius;
            return u < 1.0 ? 4.0 * std::numbers::pi * r * r * std::exp(1.0 - 1.0 / (1.0 - u * u))
                           : 0.0;
        },
        0.0, radius);
    const auto g = polymer::bump_grid(3, radius, 0.125);
    double s = 0.0;
    for (double w : g.weights) {
        s += w;
    }
    EXPECT_NEAR(s / mass, 1.0, 1e-3);
    EXPECT_THROW(polymer::bump_grid(3, 1.0, 0.5), std::invalid_argument);
}
