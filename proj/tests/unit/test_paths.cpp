#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pshe/paths.hpp"

using namespace pshe;

namespace {

const kernels::CovarianceKernel& kernel()
{
    static const kernels::CovarianceKernel v = kernels::autocorrelate(kernels::make_mollifier(3));
    return v;
}

}  // namespace

TEST(GridSteps, OnAndOffGrid)
{
    EXPECT_EQ(paths::grid_steps(1.0, 1e-3), 1000);
    EXPECT_EQ(paths::grid_steps(0.0, 1e-3), 0);
    EXPECT_THROW(paths::grid_steps(0.0015, 1e-3), std::invalid_argument);
}

TEST(Paths, EndpointCovarianceIsTime)
{
    const int n = 4000;
    const auto e = paths::sample_paths(3, n, 0.01, {0.5, 2.0}, {1.0, -1.0, 0.5}, 17);
    ASSERT_EQ(e.steps(), 200);
    double m = 0.0, v = 0.0, c01 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto x = e.at(i, e.steps());
        m += x[0];
        v += (x[0] - 1.0) * (x[0] - 1.0);
        c01 += (x[0] - 1.0) * (x[1] + 1.0);
    }
    EXPECT_NEAR(m / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(v / n, 2.0, 5.0 * 2.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(c01 / n, 0.0, 5.0 * 2.0 / std::sqrt(n));
}

TEST(Paths, DeterministicPerSeed)
{
    const auto a = paths::sample_paths(3, 8, 0.01, {1.0}, {0.0, 0.0, 0.0}, 3);
    const auto b = paths::sample_paths(3, 8, 0.01, {1.0}, {0.0, 0.0, 0.0}, 3);
    const auto c = paths::sample_paths(3, 8, 0.01, {1.0}, {0.0, 0.0, 0.0}, 4);
    EXPECT_EQ(a.positions, b.positions);
    EXPECT_NE(a.positions, c.positions);
}

TEST(Overlap, MatchesBruteForceTrapezoid)
{
    const int n = 12;
    const double dt = 0.01;
    const auto e = paths::sample_paths(3, n, dt, {0.5, 1.0}, {0.0, 0.0, 0.0}, 99);
    const auto g = paths::overlap_gram(e, kernel());
    ASSERT_EQ(g.matrices.size(), 2u);
    for (std::size_t k = 0; k < 2; ++k) {
        const std::int64_t steps = e.horizon_steps[k];
        for (int i = 0; i < n; ++i) {
            EXPECT_NEAR(g.at(k, i, i), e.horizons[k] * kernel().v0(), 1e-12);
            for (int j = i + 1; j < n; ++j) {
                double s = 0.0;
                for (std::int64_t t = 0; t <= steps; ++t) {
                    const auto a = e.at(i, t);
                    const auto b = e.at(j, t);
                    const double r = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
                    s += (t == 0 || t == steps ? 0.5 : 1.0) * dt * kernel().radial(r);
                }
                EXPECT_NEAR(g.at(k, i, j), s, 1e-10);
                EXPECT_EQ(g.at(k, i, j), g.at(k, j, i));
            }
        }
    }
}

TEST(Overlap, DistantPathsDoNotInteract)
{
    const auto e = paths::sample_paths(3, 2, 0.01, {1.0}, {0.0, 0.0, 0.0, 40.0, 0.0, 0.0}, 1);
    const auto g = paths::overlap_gram(e, kernel());
    EXPECT_EQ(g.at(0, 0, 1), 0.0);
}

TEST(Khasminskii, RadialOracle)
{
    // d = 3: 2 beta^2 int rho(s, y) V(sqrt2 y) dy ds = 2 beta^2 int_0^1 u V(u) du
    const double integral =
        oracle::simpson([](double u) { return u * kernel().radial(u); }, 0.0, 1.0, 4000);
    EXPECT_NEAR(paths::khasminskii_margin(1.0, kernel()), 2.0 * integral, 1e-8);
    EXPECT_NEAR(paths::khasminskii_margin(0.2, kernel()), 0.08 * integral, 1e-9);
    EXPECT_EQ(paths::khasminskii_margin(0.0, kernel()), 0.0);
}

TEST(ExpFunctional, TrivialAtBetaZero)
{
    paths::FunctionalOptions o;
    o.n_samples = 16;
    const std::vector<double> y{2.0, 0.0, 0.0};
    const auto e = paths::exp_functional(y, 0.0, kernel(), o);
    EXPECT_EQ(e.value, 1.0);
    EXPECT_EQ(e.se, 0.0);
}

TEST(ExpFunctional, InadmissibleBetaRejected)
{
    paths::FunctionalOptions o;
    o.n_samples = 16;
    const std::vector<double> y{0.0, 0.0, 0.0};
    EXPECT_THROW(paths::exp_functional(y, 3.0, kernel(), o), paths::InadmissibleBeta);
}

TEST(ExpFunctional, SmallBetaFirstOrder)
{
    // E_y[int_0^S V(sqrt2 W_s) ds] = int V(sqrt2 z) int_0^S rho(s, z - y) ds dz, and for |y| well
    // outside the support the inner integral is erfc(|y| / sqrt(2 S)) / (2 pi |y|) to high accuracy.
    paths::FunctionalOptions o;
    o.n_samples = 4000;
    o.s_max = 128.0;
    o.seed = 5;
    const double r = 3.0;
    const std::vector<double> y{r, 0.0, 0.0};
    const double beta = 0.2;
    const double first = std::erfc(r / std::sqrt(2.0 * o.s_max)) / (2.0 * M_PI * r) *
                         std::pow(2.0, -1.5);
    const auto e = paths::exp_functional(y, beta, kernel(), o);
    EXPECT_NEAR(e.value - 1.0, beta * beta * first, 5.0 * e.se + 0.1 * beta * beta * first);
}
