#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace pshe::rng {

//! SplitMix64 output function applied to a single word.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

//! Derive an independent 64-bit stream key from a seed and stream labels.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ a) + b);
}

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {
inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}
}  // namespace detail

//! Philox4x32 with 10 rounds (Salmon et al. 2011).
inline Counter philox4x32_10(Counter c, Key k)
{
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += w0;
            k[1] += w1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo(m0, c[0], hi0, lo0);
        detail::mulhilo(m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

//! Stateless counter-based generator: a fixed key maps 128-bit counters to 128 random bits.
class Philox
{
  public:
    explicit Philox(std::uint64_t key)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}
    {
    }

    Counter operator()(std::uint64_t a, std::uint64_t b) const
    {
        return philox4x32_10({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                              static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
                             key_);
    }

  private:
    Key key_;
};

//! Uniform on the open interval (0,1) with 53 random bits.
inline double uniform53(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    // The top bucket midpoint rounds up to 1; keep it strictly inside the interval.
    return std::min((static_cast<double>(bits) + 0.5) * 0x1.0p-53, 1.0 - 0x1.0p-53);
}

//! Uniform on the open interval (0,1) with 32 random bits.
inline double uniform32(std::uint32_t x)
{
    return (static_cast<double>(x) + 0.5) * 0x1.0p-32;
}

//! Standard normal quantile.
inline double normal_quantile(double p)
{
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

//! Standard normal by inverse CDF from the first 64 bits of a block.
inline double normal_icdf(const Counter& c)
{
    return normal_quantile(uniform53(c[0], c[1]));
}

//! Two standard normal pairs from one block by the Box-Muller transform.
inline std::array<double, 4> box_muller4(const Counter& c)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double r0 = std::sqrt(-2.0 * std::log(uniform32(c[0])));
    const double r1 = std::sqrt(-2.0 * std::log(uniform32(c[2])));
    const double a0 = two_pi * uniform32(c[1]);
    const double a1 = two_pi * uniform32(c[3]);
    return {r0 * std::cos(a0), r0 * std::sin(a0), r1 * std::cos(a1), r1 * std::sin(a1)};
}

//! Sequential normal stream over a Philox key, for non-hot-path sampling.
class NormalStream
{
  public:
    NormalStream(std::uint64_t key, std::uint64_t stream) : gen_(key), stream_(stream) {}

    double operator()()
    {
        if (pos_ == 4) {
            buf_ = box_muller4(gen_(stream_, block_++));
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    double uniform()
    {
        const Counter c = gen_(stream_, block_++);
        return uniform53(c[0], c[1]);
    }

  private:
    Philox gen_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<double, 4> buf_{};
    int pos_ = 4;
};

}  // namespace pshe::rng
