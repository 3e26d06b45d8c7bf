#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pshe/constants.hpp"

using namespace pshe;

namespace {

const kernels::CovarianceKernel& kernel()
{
    static const kernels::CovarianceKernel v = kernels::autocorrelate(kernels::make_mollifier(3));
    return v;
}

constants::Budget tiny()
{
    constants::Budget b;
    b.nodes = 8;
    b.samples_per_node = 200;
    b.c1_samples = 400;
    b.s_max = 64.0;
    b.dt = 1e-2;
    b.seed = 3;
    return b;
}

}  // namespace

TEST(C2, ClosedForm)
{
    EXPECT_NEAR(constants::c2(3), 2.0 / std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(constants::c2(4), 1.0, 1e-14);
    EXPECT_NEAR(constants::c2(5), 4.0 / (3.0 * std::sqrt(std::numbers::pi)), 1e-14);
}

TEST(C2, MonteCarloAgrees)
{
    for (int d : {3, 4, 5}) {
        const auto e = constants::c2_monte_carlo(d, 200000, 11);
        EXPECT_NEAR(e.value, constants::c2(d), 4.0 * e.se) << "d = " << d;
        EXPECT_GT(e.se, 0.0);
    }
}

TEST(Gamma, VanishesAtBetaZero)
{
    EXPECT_EQ(constants::gamma_sq(0.0, kernel(), tiny()).value, 0.0);
    EXPECT_EQ(constants::c1(0.0, kernel(), tiny()).value, 0.0);
}

TEST(Gamma, WeakCouplingApproachesKernelMass)
{
    // gamma^2 / beta^2 = int V(y) E_y[exp(beta^2 ...)] dy -> int V = 1 as beta -> 0.
    const double beta = 0.05;
    const auto g = constants::gamma_sq(beta, kernel(), tiny());
    const double ratio = g.value / (beta * beta);
    EXPECT_GE(ratio, 1.0 - 1e-6);
    EXPECT_LE(ratio, 1.01);
}

TEST(C0, FormsAgreeAndFormAIsScaledGamma)
{
    const double beta = 0.3;
    const auto b = tiny();
    const auto pair = constants::c0_two_forms(beta, kernel(), b);
    const auto g = constants::gamma_sq(beta, kernel(), b);
    EXPECT_NEAR(pair.a.value, g.value / std::pow(4.0 * std::numbers::pi, 1.5),
                1e-12 * pair.a.value);
    EXPECT_NEAR(pair.a.value, pair.b.value, 4.0 * std::hypot(pair.a.se, pair.b.se));
}
