#include "pshe/environment.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pshe::env {

namespace {

constexpr std::uint64_t kNoiseTag = 0x6e6f697365ull;

bool is_multiple(double a, double step)
{
    const double q = a / step;
    return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q));
}

std::int64_t wrap(std::int64_t i, std::int64_t n)
{
    const std::int64_t r = i % n;
    return r < 0 ? r + n : r;
}

}  // namespace

std::vector<std::string> LatticeSpec::violations(double eps) const
{
    std::vector<std::string> out;
    if (d < 3) {
        out.push_back("d must be at least 3");
    }
    if (!(dx > 0.0)) {
        out.push_back("dx must be positive");
    }
    if (!(dt > 0.0)) {
        out.push_back("dt must be positive");
    }
    if (!(box > 0.0)) {
        out.push_back("box must be positive");
    }
    if (!(horizon > 0.0)) {
        out.push_back("horizon must be positive");
    }
    if (dx > 0.0 && box > 0.0 && !is_multiple(box, dx)) {
        out.push_back("box / dx must be an integer");
    }
    if (dt > 0.0 && horizon > 0.0 && !is_multiple(horizon, dt)) {
        out.push_back("horizon / dt must be an integer");
    }
    if (dx > 0.25 * eps * (1.0 + 1e-12)) {
        out.push_back("dx must not exceed a quarter of the mollification scale");
    }
    return out;
}

void LatticeSpec::validate(double eps) const
{
    const auto v = violations(eps);
    if (!v.empty()) {
        std::ostringstream os;
        os << "invalid lattice:";
        for (const auto& s : v) {
            os << ' ' << s << ';';
        }
        throw std::invalid_argument(os.str());
    }
}

std::int64_t LatticeSpec::cells_per_side() const
{
    return static_cast<std::int64_t>(std::llround(box / dx));
}

std::int64_t LatticeSpec::cell_count() const
{
    std::int64_t n = 1;
    for (int c = 0; c < d; ++c) {
        n *= cells_per_side();
    }
    return n;
}

std::int64_t LatticeSpec::steps() const
{
    return static_cast<std::int64_t>(std::llround(horizon / dt));
}

LatticeSpec LatticeSpec::for_horizon(int d, double dx, double dt, double horizon, double t_max)
{
    LatticeSpec s;
    s.d = d;
    s.dx = dx;
    s.dt = dt;
    s.horizon = horizon;
    s.box = 2.0 * std::ceil((6.0 * std::sqrt(t_max) + 0.5) / dx - 1e-9) * dx;
    return s;
}

NoiseField::NoiseField(const LatticeSpec& spec, std::uint64_t seed)
    : spec_(spec),
      gen_(rng::derive_key(seed, kNoiseTag)),
      scale_(1.0 / std::sqrt(spec.dt * std::pow(spec.dx, spec.d)))
{
}

NoiseSlab noise_slab(const LatticeSpec& spec, std::int64_t k, std::uint64_t seed)
{
    if (k < 0 || k >= spec.steps()) {
        throw std::out_of_range("noise_slab: time index out of range");
    }
    const NoiseField field(spec, seed);
    NoiseSlab slab{spec, k, std::vector<double>(static_cast<std::size_t>(spec.cell_count()))};
    for (std::int64_t i = 0; i < spec.cell_count(); ++i) {
        slab.values[static_cast<std::size_t>(i)] = field.cell(k, i);
    }
    return slab;
}

double mollified_noise_at(const NoiseSlab& slab, const kernels::Mollifier& m, double eps,
                          std::span<const double> x)
{
    const LatticeSpec& s = slab.spec;
    if (static_cast<int>(x.size()) != s.d) {
        throw std::invalid_argument("mollified_noise_at: point dimension mismatch");
    }
    if (eps < 4.0 * s.dx * (1.0 - 1e-12)) {
        throw std::invalid_argument("mollified_noise_at: mollifier under-resolved by the lattice");
    }
    for (double xc : x) {
        if (xc < -0.5 * s.box || xc >= 0.5 * s.box) {
            throw std::invalid_argument("mollified_noise_at: point outside the box");
        }
    }
    const std::int64_t n = s.cells_per_side();
    const double reach = eps * kernels::Mollifier::support_radius;
    std::vector<std::int64_t> lo(s.d), hi(s.d), idx(s.d);
    for (int c = 0; c < s.d; ++c) {
        lo[c] = static_cast<std::int64_t>(std::ceil((x[c] - reach + 0.5 * s.box) / s.dx));
        hi[c] = static_cast<std::int64_t>(std::floor((x[c] + reach + 0.5 * s.box) / s.dx));
        idx[c] = lo[c];
    }
    const double vol = std::pow(s.dx, s.d);
    double total = 0.0;
    while (true) {
        double r2 = 0.0;
        std::int64_t linear = 0;
        std::int64_t stride = 1;
        for (int c = 0; c < s.d; ++c) {
            const double diff = x[c] - s.coordinate(idx[c]);
            r2 += diff * diff;
            linear += wrap(idx[c], n) * stride;
            stride *= n;
        }
        const double w = m.scaled(std::sqrt(r2), eps);
        if (w > 0.0) {
            total += w * slab.values[static_cast<std::size_t>(linear)] * vol;
        }
        int c = 0;
        while (c < s.d && ++idx[c] > hi[c]) {
            idx[c] = lo[c];
            ++c;
        }
        if (c == s.d) {
            break;
        }
    }
    return total;
}

void write_slab_csv(std::ostream& os, const NoiseSlab& slab)
{
    const std::int64_t n = slab.spec.cells_per_side();
    os << 'k';
    for (int c = 0; c < slab.spec.d; ++c) {
        os << ",i" << c;
    }
    os << ",value\n";
    os.precision(17);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(slab.values.size()); ++i) {
        os << slab.k;
        std::int64_t rest = i;
        for (int c = 0; c < slab.spec.d; ++c) {
            os << ',' << rest % n;
            rest /= n;
        }
        os << ',' << slab.values[static_cast<std::size_t>(i)] << '\n';
    }
}

}  // namespace pshe::env
