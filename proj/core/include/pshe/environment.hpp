#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pshe/kernels.hpp"
#include "pshe/rng.hpp"

namespace pshe::env {

//! Periodic space-time lattice carrying the discretized white noise.
struct LatticeSpec
{
    int d = 3;
    double dx = 0.25;
    double box = 8.0;
    double dt = 1e-3;
    double horizon = 1.0;

    //! Violated invariants; empty when the spec is valid. eps is the mollification scale.
    std::vector<std::string> violations(double eps = 1.0) const;
    void validate(double eps = 1.0) const;

    std::int64_t cells_per_side() const;
    std::int64_t cell_count() const;
    std::int64_t steps() const;

    //! Coordinate of lattice index i along any axis.
    double coordinate(std::int64_t i) const { return -0.5 * box + static_cast<double>(i) * dx; }

    //! Spec with half-width the smallest multiple of dx at least 6 sqrt(t_max) plus the mollifier reach.
    static LatticeSpec for_horizon(int d, double dx, double dt, double horizon, double t_max);
};

//! Counter-based cell noise: N(0, 1/(dt dx^d)) keyed by (seed, time index, cell index).
class NoiseField
{
  public:
    NoiseField(const LatticeSpec& spec, std::uint64_t seed);

    //! Standard normal behind cell (k, index).
    double standard(std::int64_t k, std::int64_t index) const
    {
        return rng::normal_icdf(gen_(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(index)));
    }

    double cell(std::int64_t k, std::int64_t index) const { return scale_ * standard(k, index); }

    double scale() const { return scale_; }
    const LatticeSpec& spec() const { return spec_; }

  private:
    LatticeSpec spec_;
    rng::Philox gen_;
    double scale_;
};

struct NoiseSlab
{
    LatticeSpec spec;
    std::int64_t k = 0;
    std::vector<double> values;
};

NoiseSlab noise_slab(const LatticeSpec& spec, std::int64_t k, std::uint64_t seed);

//! Sum over cells of phi_eps(x - y_c) xi_c dx^d, with periodic images.
double mollified_noise_at(const NoiseSlab& slab, const kernels::Mollifier& m, double eps,
                          std::span<const double> x);

//! Debug dump: one row per cell with its lattice indices and value.
void write_slab_csv(std::ostream& os, const NoiseSlab& slab);

}  // namespace pshe::env
