#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pshe/limits.hpp"

using namespace pshe::limits;

namespace {

constexpr double pi = std::numbers::pi;

SpaceTimePoint at(double t, double x)
{
    return {t, {x, 0.0, 0.0}};
}

}  // namespace

TEST(CovH, ErfClosedForm)
{
    // d = 3: gamma^2 erf(r / sqrt(2 (t + s))) / (4 pi r)
    const double g2 = 1.7;
    EXPECT_NEAR(cov_H(at(1.0, 0.0), at(1.0, 1.0), g2), g2 * std::erf(0.5) / (4.0 * pi), 1e-10);
    EXPECT_NEAR(cov_H(at(1.0, 0.0), at(3.0, 2.0), g2),
                g2 * std::erf(2.0 / std::sqrt(8.0)) / (8.0 * pi), 1e-10);
}

TEST(CovH, CoincidentPoints)
{
    // r = 0: gamma^2 (2 pi)^{-3/2} (t + s)^{-1/2}
    EXPECT_NEAR(cov_H(at(1.0, 0.0), at(1.0, 0.0), 1.0), std::pow(2.0 * pi, -1.5) / std::sqrt(2.0),
                1e-12);
    EXPECT_NEAR(cov_H(at(0.5, 0.0), at(1.5, 0.0), 2.0),
                2.0 * std::pow(2.0 * pi, -1.5) / std::sqrt(2.0), 1e-12);
}

TEST(CovH, HorizonTruncation)
{
    // The truncated integral plus its tail beyond the horizon recovers the full value.
    const auto p = at(1.0, 0.0);
    const auto q = at(2.0, 1.0);
    const double full = cov_H(p, q, 1.0);
    const double h = 10.0;
    // Tail: int_{h - 3/2}^inf rho(2 s + 3, 1) ds = erf(1 / sqrt(4 h)) / (4 pi)
    const double tail = std::erf(1.0 / std::sqrt(4.0 * h)) / (4.0 * pi);
    EXPECT_NEAR(cov_H_horizon(p, q, 1.0, h), full - tail, 1e-10);
}

TEST(CovFreeEnergy, NestedIncrements)
{
    // gamma^2 int_{max}^{h} rho(2u, r) du = gamma^2 (erfc(r/sqrt(4h)) - erfc(r/sqrt(4 max))) / (4 pi r)
    const double r = 1.0, h = 16.0;
    const double want = (std::erfc(r / std::sqrt(4.0 * h)) - std::erfc(r / std::sqrt(8.0))) /
                        (4.0 * pi * r);
    EXPECT_NEAR(cov_free_energy(at(1.0, 0.0), at(2.0, 1.0), 1.0, h), want, 1e-10);
}

TEST(CovHbar, ErfcClosedForm)
{
    // t = s = 1, r = 1: (amp^2 / 2) int_0^2 rho(v, 1) dv = amp^2 erfc(1/2) / (4 pi)
    EXPECT_NEAR(cov_Hbar(at(1.0, 0.0), at(1.0, 1.0), 3.0), 3.0 * std::erfc(0.5) / (4.0 * pi),
                1e-10);
    EXPECT_EQ(cov_Hbar(at(0.0, 0.0), at(2.0, 1.0), 1.0), 0.0);
}

TEST(CovHbar, DivergesAtCoincidentPoints)
{
    EXPECT_THROW(cov_Hbar(at(1.0, 0.0), at(1.0, 0.0), 1.0), std::domain_error);
    EXPECT_TRUE(std::isfinite(cov_Hbar(at(1.0, 0.0), at(1.0, 0.0), 1.0, Smoothing{0.1})));
}

TEST(CovHst, StationaryInTime)
{
    // Equal-time marginal gamma^2 / (4 pi r) for every t when amp = gamma.
    for (double t : {0.0, 1.0, 4.0, 9.0}) {
        EXPECT_NEAR(cov_Hst(at(t, 0.0), at(t, 1.5), 2.0), 2.0 / (6.0 * pi), 1e-10) << t;
    }
    EXPECT_GT(std::abs(cov_Hst(at(4.0, 0.0), at(4.0, 1.5), 2.0, 4.0) - 2.0 / (6.0 * pi)), 1e-3);
}

TEST(Gff, PrefactorRatio)
{
    EXPECT_NEAR(gff_closed_form(3, 2.0, 1.0), 1.0 / (2.0 * pi), 1e-14);
    EXPECT_NEAR(gff_prefactor_ratio(3), 0.25, 1e-10);
    EXPECT_NEAR(gff_prefactor_ratio(4, 2.0), 0.25, 1e-10);
}

TEST(LimitSpec, SamplesMatchCovariance)
{
    const auto spec = make_limit_spec(Field::H, 3, {at(1.0, 0.0), at(1.0, 1.0), at(2.0, 0.0)}, 1.0,
                                      0.0);
    ASSERT_EQ(spec.covariance.rows(), 3);
    EXPECT_NEAR(spec.covariance(0, 1), cov_H(at(1.0, 0.0), at(1.0, 1.0), 1.0), 1e-14);
    const int n = 40000;
    const auto s = sample_limit(spec, n, 8);
    ASSERT_EQ(s.values.rows(), n);
    const Eigen::MatrixXd c = s.values.transpose() * s.values / n;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double sd = std::sqrt(spec.covariance(i, i) * spec.covariance(j, j));
            EXPECT_NEAR(c(i, j), spec.covariance(i, j), 5.0 * sd * std::sqrt(2.0 / n));
        }
    }
    const auto again = sample_limit(spec, 10, 8);
    EXPECT_EQ(again.values.row(3), s.values.row(3));
}

TEST(LimitSpec, HbarCoincidentPointsRejected)
{
    EXPECT_THROW(make_limit_spec(Field::Hbar, 3, {at(1.0, 0.0), at(1.0, 0.0)}, 1.0, 0.0),
                 std::domain_error);
}
