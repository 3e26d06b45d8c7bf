#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "pshe/kernels.hpp"

using namespace pshe::kernels;

namespace {

const Mollifier& mollifier()
{
    static const Mollifier m = make_mollifier(3);
    return m;
}

const CovarianceKernel& kernel()
{
    static const CovarianceKernel v = autocorrelate(mollifier());
    return v;
}

}  // namespace

TEST(Mollifier, UnitMassAndSupport)
{
    const double mass = oracle::simpson(
        [](double r) { return 4.0 * std::numbers::pi * r * r * mollifier().radial(r); }, 0.0, 0.5);
    EXPECT_NEAR(mass, 1.0, 1e-10);
    EXPECT_EQ(mollifier().radial(0.5), 0.0);
    EXPECT_NEAR(mollifier().radial(0.2), oracle::mollifier3(0.2), 1e-10);
}

TEST(Kernel, PeakIsL2NormSquared)
{
    const double v0 = oracle::simpson(
        [](double r) {
            const double p = oracle::mollifier3(r);
            return 4.0 * std::numbers::pi * r * r * p * p;
        },
        0.0, 0.5);
    EXPECT_NEAR(v0, 3.951603745653, 1e-8);
    EXPECT_NEAR(kernel().v0(), v0, 1e-7 * v0);
}

TEST(Kernel, UnitMassCompactSupport)
{
    const double mass = oracle::simpson(
        [](double r) { return 4.0 * std::numbers::pi * r * r * kernel().radial(r); }, 0.0, 1.0);
    EXPECT_NEAR(mass, 1.0, 1e-6);
    EXPECT_EQ(kernel().radial(1.0), 0.0);
    EXPECT_EQ(kernel().radial(1.7), 0.0);
}

TEST(Kernel, TableMatchesDirectConvolution)
{
    for (double r : {0.05, 0.3, 0.61, 0.9}) {
        EXPECT_NEAR(kernel().radial(r), convolve_radial(mollifier(), r), 1e-6 * kernel().v0())
            << "r = " << r;
    }
}

TEST(Kernel, MonotoneProfile)
{
    double prev = kernel().v0();
    for (int i = 1; i <= 200; ++i) {
        const double v = kernel().radial(i / 200.0);
        EXPECT_LE(v, prev + 1e-15);
        EXPECT_GE(v, 0.0);
        prev = v;
    }
}

TEST(HeatKernel, Origin)
{
    EXPECT_NEAR(heat_kernel_radial(3, 1.0, 0.0), 0.0634936359342410, 1e-13);
    const std::vector<double> x{0.3, -0.4, 1.2};
    EXPECT_NEAR(heat_kernel(3, 2.0, x),
                std::pow(4.0 * std::numbers::pi, -1.5) * std::exp(-(0.09 + 0.16 + 1.44) / 4.0),
                1e-15);
}

TEST(HeatTimeIntegral, GreensFunction)
{
    // int_0^inf rho(2 s, r) ds = Gamma(d/2 - 1) / (4 pi^{d/2} r^{d-2})
    EXPECT_NEAR(heat_time_integral(3, 1.0), 1.0 / (4.0 * std::numbers::pi), 1e-10);
    EXPECT_NEAR(heat_time_integral(3, 2.5), 1.0 / (10.0 * std::numbers::pi), 1e-10);
    EXPECT_NEAR(heat_time_integral(4, 2.0), 1.0 / (16.0 * std::numbers::pi * std::numbers::pi),
                1e-10);
}

TEST(HeatTimeIntegral, OffsetAgainstErf)
{
    // d = 3: int_0^inf rho(2 s + c, r) ds = erf(r / sqrt(2 c)) / (4 pi r)
    for (double r : {0.01, 0.5, 1.0, 3.0}) {
        for (double c : {0.5, 2.0, 8.0}) {
            const double want = std::erf(r / std::sqrt(2.0 * c)) / (4.0 * std::numbers::pi * r);
            EXPECT_NEAR(heat_time_integral(3, r, c), want, 1e-9 * want + 1e-14);
            EXPECT_NEAR(heat_time_integral_closed(3, r, c), want, 1e-12 * want + 1e-15);
        }
    }
}

TEST(HeatTimeIntegral, OriginWithOffset)
{
    // r = 0, d = 3: (2 pi)^{-3/2} c^{-1/2}
    EXPECT_NEAR(heat_time_integral(3, 0.0, 2.0), 0.0634936359342410 / std::sqrt(2.0), 1e-12);
}

TEST(HeatTimeIntegral, FiniteRange)
{
    // d = 3, c = 0: int_0^b rho(2 s, r) ds = erfc(r / sqrt(4 b)) / (4 pi r)
    const double r = 1.0, b = 3.0;
    EXPECT_NEAR(heat_time_integral_finite(3, r, 0.0, 0.0, b),
                std::erfc(r / std::sqrt(4.0 * b)) / (4.0 * std::numbers::pi * r), 1e-10);
}

TEST(HeatTimeIntegral, ZeroOriginDiverges)
{
    EXPECT_THROW(heat_time_integral_finite(3, 0.0, 0.0, 0.0, 1.0), std::domain_error);
}
