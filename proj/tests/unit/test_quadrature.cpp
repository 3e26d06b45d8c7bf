#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pshe/quadrature.hpp"

using namespace pshe::quad;

TEST(Integrate, Polynomial)
{
    const auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
    EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-13);
}

TEST(Integrate, ReversedLimitsFlipSign)
{
    const auto a = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
    const auto b = integrate([](double x) { return std::exp(x); }, 1.0, 0.0);
    EXPECT_NEAR(a.value, std::numbers::e - 1.0, 1e-12);
    EXPECT_NEAR(b.value, -a.value, 1e-12);
}

TEST(Integrate, PeakedIntegrand)
{
    // int_{-1}^{1} 1/(1e-4 + x^2) dx = 2 atan(100)/1e-2
    const auto r = integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0);
    EXPECT_NEAR(r.value / (200.0 * std::atan(100.0)), 1.0, 1e-9);
}

TEST(Integrate, Panels)
{
    const auto r = integrate_panels([](double x) { return std::sin(x); }, {0.0, 1.0, 2.0, std::numbers::pi});
    EXPECT_NEAR(r.value, 2.0, 1e-12);
}

TEST(GaussLegendre, ExactForDegree2nMinus1)
{
    const Rule g = gauss_legendre(5, -1.0, 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        s += g.weights[i] * std::pow(g.nodes[i], 9);
    }
    EXPECT_NEAR(s, (std::pow(2.0, 10) - 1.0) / 10.0, 1e-10);
}
