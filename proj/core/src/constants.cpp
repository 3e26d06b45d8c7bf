#include "pshe/constants.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pshe/parallel.hpp"
#include "pshe/paths.hpp"
#include "pshe/quadrature.hpp"
#include "pshe/rng.hpp"

namespace pshe::constants {

namespace {

constexpr std::uint64_t kFormA = 0x41ull;
constexpr std::uint64_t kFormB = 0x42ull;
constexpr std::uint64_t kC1 = 0x4331ull;
constexpr std::uint64_t kC2 = 0x4332ull;

paths::FunctionalOptions node_options(const Budget& b, std::uint64_t seed)
{
    paths::FunctionalOptions o;
    o.s_max = b.s_max;
    o.dt = b.dt;
    o.n_samples = b.samples_per_node;
    o.seed = seed;
    o.check_admissible = false;
    return o;
}

struct NodeSum
{
    Estimate est;
    int flagged = 0;
};

// sum_n w_n r_n^{d-1} V(scale r_n) f(r_n) over Gauss nodes on [0, upper], with f estimated at
// each node by `functional` and its standard error propagated.
template <class Functional>
NodeSum radial_sum(const kernels::CovarianceKernel& v, double upper, double scale, int nodes,
                   int threads, Functional&& functional)
{
    const int d = v.dimension();
    const quad::Rule rule = quad::gauss_legendre(nodes, 0.0, upper);
    const auto est = run_indexed(nodes, threads, [&](std::int64_t n) {
        return functional(static_cast<int>(n), rule.nodes[static_cast<std::size_t>(n)]);
    });
    NodeSum out;
    double var = 0.0;
    for (int n = 0; n < nodes; ++n) {
        const double r = rule.nodes[n];
        const double w = rule.weights[n] * std::pow(r, d - 1) * v.radial(scale * r);
        out.est.value += w * est[n].value;
        var += w * w * est[n].se * est[n].se;
        out.est.samples += est[n].n_samples;
        out.flagged += est[n].flagged ? 1 : 0;
    }
    out.est.value *= kernels::sphere_area(d);
    out.est.se = kernels::sphere_area(d) * std::sqrt(var);
    return out;
}

void check_beta(double beta, const kernels::CovarianceKernel& v)
{
    if (beta < 0.0 || !std::isfinite(beta)) {
        throw std::invalid_argument("beta must be a nonnegative real");
    }
    paths::require_admissible(beta, v);
}

}  // namespace

GammaIntegral gamma_integral(double beta, const kernels::CovarianceKernel& v, const Budget& b)
{
    check_beta(beta, v);
    const int d = v.dimension();
    const NodeSum s = radial_sum(v, 1.0, 1.0, b.nodes, b.threads, [&](int n, double r) {
        std::vector<double> u0(d, 0.0);
        u0[0] = r;
        return paths::diffusion_functional(
            u0, beta, v, node_options(b, rng::derive_key(b.seed, kFormA, std::uint64_t(n))));
    });
    return {s.est, s.flagged};
}

Estimate gamma_sq(double beta, const kernels::CovarianceKernel& v, const Budget& b)
{
    const GammaIntegral g = gamma_integral(beta, v, b);
    const double b2 = beta * beta;
    return {b2 * g.integral.value, b2 * g.integral.se, g.integral.samples};
}

Estimate c0_form_b(double beta, const kernels::CovarianceKernel& v, const Budget& b)
{
    check_beta(beta, v);
    const int d = v.dimension();
    const NodeSum s = radial_sum(v, 1.0 / std::numbers::sqrt2, std::numbers::sqrt2, b.nodes,
                                 b.threads, [&](int n, double r) {
                                     std::vector<double> y(d, 0.0);
                                     y[0] = r;
                                     return paths::exp_functional(
                                         y, beta, v,
                                         node_options(b, rng::derive_key(b.seed, kFormB,
                                                                         std::uint64_t(n))));
                                 });
    const double norm = beta * beta * std::pow(2.0 * std::numbers::pi, -0.5 * d);
    return {norm * s.est.value, norm * s.est.se, s.est.samples};
}

C0Pair c0_two_forms(double beta, const kernels::CovarianceKernel& v, const Budget& b)
{
    const Estimate g = gamma_sq(beta, v, b);
    const double norm_a = std::pow(4.0 * std::numbers::pi, -0.5 * v.dimension());
    return {{g.value * norm_a, g.se * norm_a, g.samples}, c0_form_b(beta, v, b)};
}

Estimate c1(double beta, const kernels::CovarianceKernel& v, const Budget& b)
{
    check_beta(beta, v);
    const int d = v.dimension();
    if (beta == 0.0) {
        return {0.0, 0.0, b.c1_samples};
    }
    std::vector<double> y(d, 0.0);
    y[0] = 1.0 / std::numbers::sqrt2;
    paths::FunctionalOptions o = node_options(b, rng::derive_key(b.seed, kC1));
    o.n_samples = b.c1_samples;
    const auto e = paths::exp_functional(y, beta, v, o);
    return {e.value - 1.0, e.se, e.n_samples};
}

double c2(int d)
{
    if (d < 3) {
        throw std::invalid_argument("c2: dimension must be at least 3");
    }
    return 1.0 / std::tgamma(0.5 * d);
}

Estimate c2_monte_carlo(int d, std::int64_t normals, std::uint64_t seed)
{
    if (d < 3) {
        throw std::invalid_argument("c2: dimension must be at least 3");
    }
    const std::int64_t n = normals / d;
    if (n < 2) {
        throw std::invalid_argument("c2_monte_carlo: too few normals");
    }
    rng::NormalStream z(rng::derive_key(seed, kC2), 0);
    double sum = 0.0, sum2 = 0.0;
    const double a = 0.5 * (d - 2);
    for (std::int64_t i = 0; i < n; ++i) {
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double x = z();
            r2 += x * x;
        }
        const double f = std::pow(2.0 / r2, a);
        sum += f;
        sum2 += f * f;
    }
    const double mean = sum / n;
    return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1)), n};
}

ConstantsTable build_table(double beta, const kernels::CovarianceKernel& v, const Budget& b,
                           std::int64_t c2_normals)
{
    ConstantsTable t;
    t.beta = beta;
    t.d = v.dimension();
    t.budget = b;
    const GammaIntegral g = gamma_integral(beta, v, b);
    const double b2 = beta * beta;
    t.gbar_sq = g.integral;
    t.gamma_sq = {b2 * g.integral.value, b2 * g.integral.se, g.integral.samples};
    t.flagged_nodes = g.flagged_nodes;
    const double norm_a = std::pow(4.0 * std::numbers::pi, -0.5 * t.d);
    t.c0_a = {t.gamma_sq.value * norm_a, t.gamma_sq.se * norm_a, t.gamma_sq.samples};
    t.c0_b = c0_form_b(beta, v, b);
    t.c1 = c1(beta, v, b);
    t.c2 = c2(t.d);
    t.c2_mc = c2_monte_carlo(t.d, c2_normals, b.seed);
    t.khasminskii = paths::khasminskii_margin(beta, v);
    return t;
}

}  // namespace pshe::constants
