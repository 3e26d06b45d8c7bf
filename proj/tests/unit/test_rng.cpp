#include <gtest/gtest.h>

#include <cmath>

#include "pshe/rng.hpp"

using namespace pshe::rng;

TEST(Philox, KnownAnswerZero)
{
    const Counter c = philox4x32_10({0u, 0u, 0u, 0u}, {0u, 0u});
    EXPECT_EQ(c[0], 0x6627e8d5u);
    EXPECT_EQ(c[1], 0xe169c58du);
    EXPECT_EQ(c[2], 0xbc57ac4cu);
    EXPECT_EQ(c[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes)
{
    const Counter c = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                    {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(c[0], 0x408f276du);
    EXPECT_EQ(c[1], 0x41c83b0eu);
    EXPECT_EQ(c[2], 0xa20bc7c6u);
    EXPECT_EQ(c[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi)
{
    const Counter c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                    {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(c[0], 0xd16cfe09u);
    EXPECT_EQ(c[1], 0x94fdccebu);
    EXPECT_EQ(c[2], 0x5001e420u);
    EXPECT_EQ(c[3], 0x24126ea1u);
}

TEST(Philox, WrapperSplitsWordsLittleEndian)
{
    const Philox g(0x299f31d0a4093822ull);
    const Counter c = g(0x85a308d3243f6a88ull, 0x0370734413198a2eull);
    EXPECT_EQ(c[0], 0xd16cfe09u);
}

TEST(Uniform, OpenInterval)
{
    EXPECT_GT(uniform53(0u, 0u), 0.0);
    EXPECT_LT(uniform53(0xffffffffu, 0xffffffffu), 1.0);
    EXPECT_GT(uniform32(0u), 0.0);
    EXPECT_LT(uniform32(0xffffffffu), 1.0);
}

TEST(Normal, QuantileMatchesTabulatedValues)
{
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
    EXPECT_NEAR(normal_quantile(0.001), -3.090232306167813, 1e-11);
}

TEST(Normal, StreamMoments)
{
    NormalStream s(derive_key(7, 1), 3);
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s();
        m1 += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m4, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(DeriveKey, DistinctStreams)
{
    EXPECT_NE(derive_key(1, 2, 3), derive_key(1, 3, 2));
    EXPECT_NE(derive_key(1, 2), derive_key(2, 2));
    EXPECT_EQ(derive_key(5, 6, 7), derive_key(5, 6, 7));
}
