#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pshe/environment.hpp"
#include "pshe/kernels.hpp"

namespace pshe::polymer {

enum class Backend { gram, field };

std::string to_string(Backend b);
Backend parse_backend(std::string_view s);

struct PolymerConfig
{
    int d = 3;
    double beta = 0.2;
    double dt = 1e-3;
    int paths_per_start = 64;
    std::vector<double> horizons{1.0};
    //! Start points, n_starts * d coordinates.
    std::vector<double> starts{0.0, 0.0, 0.0};
    Backend backend = Backend::gram;
    std::uint64_t seed = 0;
    //! Field backend: tolerated fraction of walkers leaving the periodic box.
    double max_wrap_fraction = 1e-3;

    int n_starts() const { return d > 0 ? static_cast<int>(starts.size()) / d : 0; }
    int n_paths() const { return n_starts() * paths_per_start; }

    //! Structural violations; admissibility of beta is checked separately.
    std::vector<std::string> violations() const;
    void validate(const kernels::CovarianceKernel& v) const;
};

struct Diagnostics
{
    double max_jitter = 0.0;
    int windows = 0;
    int largest_component = 0;
    std::int64_t wrap_events = 0;
};

//! Z_{T_k}(x_m) for every horizon and start of one replica under one environment.
struct PolymerSample
{
    std::int64_t replica = 0;
    Backend backend = Backend::gram;
    int d = 3;
    double beta = 0.0;
    std::vector<double> horizons;
    std::vector<double> starts;
    std::vector<double> z;
    Diagnostics diag;

    int n_starts() const { return static_cast<int>(starts.size()) / d; }
    double at(std::size_t k, int m) const { return z[k * n_starts() + m]; }
    double log_at(std::size_t k, int m) const;
};

//! Gram backend replica with the path data needed by the bracket and moment estimators.
struct GramRealization
{
    PolymerSample sample;
    int paths_per_start = 0;
    int n_paths = 0;
    //! Cumulative overlaps per horizon, dense n_paths x n_paths (left at zero when beta is zero).
    std::vector<std::vector<double>> overlaps;
    //! G_i(T_k) at [k * n_paths + i].
    std::vector<double> gauss;
    //! W^i_{T_k} at [(k * n_paths + i) * d + c].
    std::vector<double> endpoints;

    double overlap(std::size_t k, int i, int j) const
    {
        return overlaps[k][static_cast<std::size_t>(i) * n_paths + j];
    }
};

std::uint64_t replica_seed(std::uint64_t master, std::int64_t replica);

GramRealization realize_gram(const PolymerConfig& cfg, const kernels::CovarianceKernel& v,
                             std::int64_t replica);

PolymerSample sample_polymer_gram(const PolymerConfig& cfg, const kernels::CovarianceKernel& v,
                                  std::int64_t replica);

PolymerSample sample_polymer_field(const PolymerConfig& cfg, const env::LatticeSpec& lattice,
                                   const kernels::Mollifier& m, std::int64_t replica);

//! Lattice with the default box for the configuration's largest horizon.
env::LatticeSpec default_lattice(const PolymerConfig& cfg, double dx);

//! beta^2/(pairs) sum_{i in paths(a), j in paths(b), i != j} Phi_i Phi_j V(W^i_T - W^j_T).
double bracket_derivative(const GramRealization& g, const kernels::CovarianceKernel& v,
                          std::size_t k, int a, int b);

//! Environment-integrated U-statistics for L_T = T^{d/2} bracket - C0 Z_T^2 at one start.
struct BracketMoments
{
    double mean = 0.0;
    double mean_square = 0.0;
};
BracketMoments integrated_bracket_moments(const GramRealization& g,
                                          const kernels::CovarianceKernel& v, std::size_t k,
                                          int start, double c0);

//! Path average of exp(beta^2 O_ij(T_k)) over i in paths(a), j in paths(b), i != j;
//! unbiased for E[Z_{T_k}(x_a) Z_{T_k}(x_b)].
double integrated_pair_moment(const GramRealization& g, std::size_t k, int a, int b);

//! Unbiased for E[(Z_{T_a1} - Z_{T_a0})(x_a) (Z_{T_b1} - Z_{T_b0})(x_b)] from the path law,
//! using E[Z_s(x) Z_t(y)] = E[exp(beta^2 O(min(s,t)))]. Horizon indices with -1 standing
//! for time zero.
double integrated_increment_moment(const GramRealization& g, int a0, int a1, int b0, int b1,
                                   int a, int b);

struct ReplicaOptions
{
    std::int64_t replicas = 100;
    int threads = 1;
    std::int64_t first = 0;
    //! Lattice spacing for the field backend.
    double lattice_dx = 0.25;
};

//! Replicas first .. first+replicas-1 of either backend, in replica order.
std::vector<PolymerSample> simulate(const PolymerConfig& cfg, const kernels::Mollifier& m,
                                    const kernels::CovarianceKernel& v, const ReplicaOptions& opt);

//! g(tau) = 2/(d-2) C0 (1 - tau^{-(d-2)/2}).
double g_target(int d, double c0, double tau);

struct GProcess
{
    double base_t = 0.0;
    std::vector<double> tau;
    std::vector<double> target;
    std::int64_t replicas = 0;
    //! T^{(d-2)/4} (Z_{tau T} / Z_T - 1) at [replica * tau.size() + j].
    std::vector<double> values;
};

//! Configuration whose horizons are tau * base_t for the tau grid (which starts at 1).
PolymerConfig g_process_config(const PolymerConfig& base, double base_t,
                               const std::vector<double>& tau);

GProcess g_process(const std::vector<PolymerSample>& samples, double base_t,
                   const std::vector<double>& tau, double c0, int start = 0);

struct FluctuationSet
{
    double t_base = 0.0;
    double t_max = 0.0;
    std::vector<double> t;
    //! Unscaled points x; the polymer starts are x sqrt(T).
    std::vector<double> points;
    int d = 3;
    std::int64_t replicas = 0;
    //! T^{(d-2)/4} (log Z_{T_max}(x sqrt T) - log Z_{t T}(x sqrt T)) at [(r * t.size() + i) * n + m].
    std::vector<double> values;

    int n_points() const { return static_cast<int>(points.size()) / d; }
    double at(std::int64_t r, std::size_t i, int m) const
    {
        return values[(static_cast<std::size_t>(r) * t.size() + i) * n_points() + m];
    }
    std::vector<double> column(std::size_t i, int m) const;
};

//! Horizons {t T} and T_max with starts x sqrt(T); requires T_max >= 16 T on the dt grid.
PolymerConfig fluctuation_config(const PolymerConfig& base, double t_base, double t_max,
                                 const std::vector<double>& t, const std::vector<double>& points);

FluctuationSet fluctuation_samples(const std::vector<PolymerSample>& samples, double t_base,
                                   double t_max, const std::vector<double>& t,
                                   const std::vector<double>& points);

//! sum_m w_m * fluctuation(t index i, point m) per replica, with weights phi(x_m) h^d.
std::vector<double> averaged_fluctuation(const FluctuationSet& set, std::size_t i,
                                         const std::vector<double>& weights);

//! Grid points of spacing h inside the ball of the given radius and weights phi(x) h^d.
struct TestFunctionGrid
{
    std::vector<double> points;
    std::vector<double> weights;
};
TestFunctionGrid bump_grid(int d, double radius, double h);

//! Smooth bump of the given radius, exp(1 - 1/(1 - |x/R|^2)), equal to one at the origin.
double test_bump(double r, double radius);

}  // namespace pshe::polymer
