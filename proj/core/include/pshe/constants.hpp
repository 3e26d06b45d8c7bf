#pragma once

#include <cstdint>

#include "pshe/kernels.hpp"

namespace pshe::constants {

struct Estimate
{
    double value = 0.0;
    double se = 0.0;
    std::int64_t samples = 0;
};

struct Budget
{
    int nodes = 32;
    std::int64_t samples_per_node = 2000;
    std::int64_t c1_samples = 20000;
    double s_max = 128.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    int threads = 1;
};

//! int V(y) E_y[exp(beta^2 int_0^inf V(W_{2s}) ds)] dy; gamma^2 = beta^2 times this.
struct GammaIntegral
{
    Estimate integral;
    int flagged_nodes = 0;
};
GammaIntegral gamma_integral(double beta, const kernels::CovarianceKernel& v, const Budget& b);

Estimate gamma_sq(double beta, const kernels::CovarianceKernel& v, const Budget& b);

struct C0Pair
{
    Estimate a;
    Estimate b;
};

//! Form A: gamma^2 / (4 pi)^{d/2}. Form B: beta^2 (2 pi)^{-d/2} int V(sqrt2 y) E_y[...] dy.
C0Pair c0_two_forms(double beta, const kernels::CovarianceKernel& v, const Budget& b);
Estimate c0_form_b(double beta, const kernels::CovarianceKernel& v, const Budget& b);

//! E_{e1/sqrt2}[exp(beta^2 int_0^inf V(sqrt2 W_s) ds) - 1].
Estimate c1(double beta, const kernels::CovarianceKernel& v, const Budget& b);

//! E[(sqrt2/|Z|)^{d-2}] = 1 / Gamma(d/2).
double c2(int d);
Estimate c2_monte_carlo(int d, std::int64_t normals, std::uint64_t seed);

struct ConstantsTable
{
    double beta = 0.0;
    int d = 3;
    Estimate gamma_sq;
    Estimate gbar_sq;
    Estimate c0_a;
    Estimate c0_b;
    Estimate c1;
    double c2 = 0.0;
    Estimate c2_mc;
    double khasminskii = 0.0;
    int flagged_nodes = 0;
    Budget budget;
};

ConstantsTable build_table(double beta, const kernels::CovarianceKernel& v, const Budget& b,
                           std::int64_t c2_normals = 10'000'000);

}  // namespace pshe::constants
