#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pshe/parallel.hpp"
#include "pshe/paths.hpp"
#include "pshe/polymer.hpp"

namespace pshe::polymer {

std::vector<PolymerSample> simulate(const PolymerConfig& cfg, const kernels::Mollifier& m,
                                    const kernels::CovarianceKernel& v, const ReplicaOptions& opt)
{
    cfg.validate(v);
    if (cfg.backend == Backend::gram) {
        return run_indexed(opt.replicas, opt.threads, [&](std::int64_t r) {
            return sample_polymer_gram(cfg, v, opt.first + r);
        });
    }
    const env::LatticeSpec lattice = default_lattice(cfg, opt.lattice_dx);
    return run_indexed(opt.replicas, opt.threads, [&](std::int64_t r) {
        return sample_polymer_field(cfg, lattice, m, opt.first + r);
    });
}

double g_target(int d, double c0, double tau)
{
    const double a = 0.5 * (d - 2);
    return 2.0 / (d - 2) * c0 * (1.0 - std::pow(tau, -a));
}

PolymerConfig g_process_config(const PolymerConfig& base, double base_t,
                               const std::vector<double>& tau)
{
    if (tau.empty() || tau.front() != 1.0) {
        throw std::invalid_argument("g_process: the tau grid must start at 1");
    }
    PolymerConfig cfg = base;
    cfg.horizons.clear();
    for (double t : tau) {
        cfg.horizons.push_back(t * base_t);
    }
    return cfg;
}

GProcess g_process(const std::vector<PolymerSample>& samples, double base_t,
                   const std::vector<double>& tau, double c0, int start)
{
    if (tau.empty() || tau.front() != 1.0) {
        throw std::invalid_argument("g_process: the tau grid must start at 1");
    }
    GProcess out;
    out.base_t = base_t;
    out.tau = tau;
    out.replicas = static_cast<std::int64_t>(samples.size());
    if (samples.empty()) {
        return out;
    }
    const int d = samples.front().d;
    for (double t : tau) {
        out.target.push_back(g_target(d, c0, t));
    }
    std::vector<std::size_t> index;
    const auto& h = samples.front().horizons;
    for (double t : tau) {
        const auto it = std::find_if(h.begin(), h.end(), [&](double x) {
            return std::abs(x - t * base_t) <= 1e-9 * x;
        });
        if (it == h.end()) {
            throw std::invalid_argument("g_process: horizon tau * T missing from the samples");
        }
        index.push_back(static_cast<std::size_t>(it - h.begin()));
    }
    const double scale = std::pow(base_t, 0.25 * (d - 2));
    for (const auto& s : samples) {
        const double base = s.at(index[0], start);
        for (std::size_t j = 0; j < tau.size(); ++j) {
            out.values.push_back(j == 0 ? 0.0 : scale * (s.at(index[j], start) / base - 1.0));
        }
    }
    return out;
}

std::vector<double> FluctuationSet::column(std::size_t i, int m) const
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(replicas));
    for (std::int64_t r = 0; r < replicas; ++r) {
        out.push_back(at(r, i, m));
    }
    return out;
}

PolymerConfig fluctuation_config(const PolymerConfig& base, double t_base, double t_max,
                                 const std::vector<double>& t, const std::vector<double>& points)
{
    if (t_max < 16.0 * t_base * (1.0 - 1e-12)) {
        throw std::invalid_argument("fluctuation_samples: T_max must be at least 16 T");
    }
    PolymerConfig cfg = base;
    std::vector<double> h;
    for (double ti : t) {
        if (!(ti > 0.0) || ti * t_base >= t_max) {
            throw std::invalid_argument("fluctuation_samples: need 0 < t T < T_max");
        }
        h.push_back(ti * t_base);
    }
    h.push_back(t_max);
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
    for (double x : h) {
        paths::grid_steps(x, cfg.dt);
    }
    cfg.horizons = h;
    cfg.starts = points;
    const double root = std::sqrt(t_base);
    for (double& c : cfg.starts) {
        c *= root;
    }
    return cfg;
}

FluctuationSet fluctuation_samples(const std::vector<PolymerSample>& samples, double t_base,
                                   double t_max, const std::vector<double>& t,
                                   const std::vector<double>& points)
{
    FluctuationSet out;
    out.t_base = t_base;
    out.t_max = t_max;
    out.t = t;
    out.points = points;
    out.replicas = static_cast<std::int64_t>(samples.size());
    if (samples.empty()) {
        return out;
    }
    out.d = samples.front().d;
    const auto& h = samples.front().horizons;
    auto find = [&](double x) {
        const auto it = std::find_if(h.begin(), h.end(), [&](double y) {
            return std::abs(x - y) <= 1e-9 * x;
        });
        if (it == h.end()) {
            throw std::invalid_argument("fluctuation_samples: horizon missing from the samples");
        }
        return static_cast<std::size_t>(it - h.begin());
    };
    const std::size_t kmax = find(t_max);
    std::vector<std::size_t> kt;
    for (double ti : t) {
        kt.push_back(find(ti * t_base));
    }
    const double scale = std::pow(t_base, 0.25 * (out.d - 2));
    const int n = out.n_points();
    for (const auto& s : samples) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (int m = 0; m < n; ++m) {
                const double za = s.at(kmax, m);
                const double zb = s.at(kt[i], m);
                // Equal values give an exact zero even where log would round differently.
                out.values.push_back(za == zb ? 0.0 : scale * (std::log(za) - std::log(zb)));
            }
        }
    }
    return out;
}

std::vector<double> averaged_fluctuation(const FluctuationSet& set, std::size_t i,
                                         const std::vector<double>& weights)
{
    if (static_cast<int>(weights.size()) != set.n_points()) {
        throw std::invalid_argument("averaged_fluctuation: one weight per point required");
    }
    if (set.n_points() == 0) {
        throw std::invalid_argument("averaged_fluctuation: empty support");
    }
    std::vector<double> out;
    for (std::int64_t r = 0; r < set.replicas; ++r) {
        double s = 0.0;
        for (int m = 0; m < set.n_points(); ++m) {
            s += weights[m] * set.at(r, i, m);
        }
        out.push_back(s);
    }
    return out;
}

double test_bump(double r, double radius)
{
    const double u = r / radius;
    return u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
}

TestFunctionGrid bump_grid(int d, double radius, double h)
{
    if (!(radius > 0.0)) {
        throw std::invalid_argument("bump_grid: empty support");
    }
    if (h > 0.25 * radius * (1.0 + 1e-12)) {
        throw std::invalid_argument("bump_grid: spacing exceeds a quarter of the support radius");
    }
    TestFunctionGrid g;
    const int k = static_cast<int>(std::floor(radius / h));
    std::vector<int> idx(d, -k);
    const double vol = std::pow(h, d);
    while (true) {
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) {
            r2 += (idx[c] * h) * (idx[c] * h);
        }
        const double w = test_bump(std::sqrt(r2), radius);
        if (w > 0.0) {
            for (int c = 0; c < d; ++c) {
                g.points.push_back(idx[c] * h);
            }
            g.weights.push_back(w * vol);
        }
        int c = 0;
        while (c < d && ++idx[c] > k) {
            idx[c] = -k;
            ++c;
        }
        if (c == d) {
            break;
        }
    }
    return g;
}

}  // namespace pshe::polymer
