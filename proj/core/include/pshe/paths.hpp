#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <span>
#include <stdexcept>
#include <vector>

#include "pshe/kernels.hpp"
#include "pshe/rng.hpp"

namespace pshe::paths {

//! Number of dt steps in horizon t; throws when t is not on the dt grid.
std::int64_t grid_steps(double t, double dt);

//! Brownian increments N(0, dt I) for N paths, keyed by (seed, path, step).
class PathStepper
{
  public:
    PathStepper(int d, double dt, std::vector<double> starts, std::uint64_t seed);

    int dimension() const { return d_; }
    int size() const { return n_; }
    std::int64_t step() const { return step_; }
    double time() const { return static_cast<double>(step_) * dt_; }

    //! Current positions, path-major (n * d).
    std::span<const double> positions() const { return pos_; }
    std::span<const double> position(int i) const { return {pos_.data() + i * d_, size_t(d_)}; }

    void advance();

  private:
    int d_;
    int n_;
    double dt_;
    double sd_;
    rng::Philox gen_;
    std::int64_t step_ = 0;
    std::vector<double> pos_;
};

struct PathEnsemble
{
    int d = 3;
    int n_paths = 0;
    double dt = 1e-3;
    std::vector<double> horizons;
    std::vector<std::int64_t> horizon_steps;
    std::vector<double> starts;
    std::vector<double> positions;

    std::int64_t steps() const { return horizon_steps.empty() ? 0 : horizon_steps.back(); }
    std::span<const double> at(int path, std::int64_t step) const
    {
        return {positions.data() + (step * n_paths + path) * d, static_cast<std::size_t>(d)};
    }
};

//! starts holds n*d coordinates, or d coordinates shared by every path.
PathEnsemble sample_paths(int d, int n, double dt, const std::vector<double>& horizons,
                          const std::vector<double>& starts, std::uint64_t seed);

//! Cumulative overlaps O_ij(T_k) = int_0^{T_k} V(W^i - W^j) ds, dense row-major per horizon.
struct OverlapGram
{
    int n = 0;
    std::vector<double> horizons;
    std::vector<std::vector<double>> matrices;

    double at(std::size_t k, int i, int j) const { return matrices[k][std::size_t(i) * n + j]; }
};

//! Streaming trapezoid accumulation of pairwise overlaps using a sweep over the first coordinate.
class OverlapAccumulator
{
  public:
    OverlapAccumulator(int d, int n, const kernels::CovarianceKernel& v);

    //! Adds weight * V(W^i - W^j) for every pair i < j within the support.
    void add(std::span<const double> positions, double weight);

    //! Upper-triangular accumulated values, symmetric full matrix view.
    std::vector<double> snapshot(double diagonal) const;
    void reset();

  private:
    int d_;
    int n_;
    const kernels::CovarianceKernel* v_;
    std::vector<double> acc_;
    std::vector<int> order_;
};

OverlapGram overlap_gram(const PathEnsemble& e, const kernels::CovarianceKernel& v);

struct FunctionalOptions
{
    double s_max = 128.0;
    double dt = 1e-3;
    std::int64_t n_samples = 4096;
    std::uint64_t seed = 0;
    //! Far from the support, steps are sized so the displacement standard deviation is at most
    //! the distance to the support divided by kappa.
    double kappa = 10.0;
    bool check_admissible = true;
};

struct FunctionalEstimate
{
    double value = 1.0;
    double se = 0.0;
    double half_value = 1.0;
    double half_se = 0.0;
    double truncation_diff = 0.0;
    double truncation_se = 0.0;
    bool flagged = false;
    std::int64_t n_samples = 0;
};

//! E[exp(beta^2 int_0^S V(u0 + B_{2s}) ds)] with B standard, S = s_max; paired S/2 diagnostic.
FunctionalEstimate diffusion_functional(std::span<const double> u0, double beta,
                                        const kernels::CovarianceKernel& v,
                                        const FunctionalOptions& opt);

//! E_y[exp(beta^2 int_0^S V(sqrt(2) W_s) ds)].
FunctionalEstimate exp_functional(std::span<const double> y, double beta,
                                  const kernels::CovarianceKernel& v, const FunctionalOptions& opt);

//! 2 beta^2 int_0^inf int rho(s,y) V(sqrt(2) y) dy ds.
double khasminskii_margin(double beta, const kernels::CovarianceKernel& v);

class InadmissibleBeta : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

void require_admissible(double beta, const kernels::CovarianceKernel& v);

}  // namespace pshe::paths
