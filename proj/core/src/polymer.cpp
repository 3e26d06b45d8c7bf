#include "pshe/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pshe/paths.hpp"
#include "pshe/rng.hpp"

namespace pshe::polymer {

namespace {

constexpr std::uint64_t kGramPathTag = 0x6770617468ull;
constexpr std::uint64_t kFieldPathTag = 0x6670617468ull;
constexpr std::uint64_t kGaussTag = 0x6761757373ull;
constexpr std::uint64_t kFieldNoiseTag = 0x666e6f697365ull;

struct UnionFind
{
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i)
    {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

std::vector<double> path_starts(const PolymerConfig& cfg)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(cfg.n_paths()) * cfg.d);
    for (int m = 0; m < cfg.n_starts(); ++m) {
        for (int i = 0; i < cfg.paths_per_start; ++i) {
            out.insert(out.end(), cfg.starts.begin() + m * cfg.d,
                       cfg.starts.begin() + (m + 1) * cfg.d);
        }
    }
    return out;
}

std::vector<std::int64_t> horizon_steps(const PolymerConfig& cfg)
{
    std::vector<std::int64_t> out;
    for (double t : cfg.horizons) {
        out.push_back(paths::grid_steps(t, cfg.dt));
    }
    return out;
}

PolymerSample empty_sample(const PolymerConfig& cfg, std::int64_t replica)
{
    PolymerSample s;
    s.replica = replica;
    s.backend = cfg.backend;
    s.d = cfg.d;
    s.beta = cfg.beta;
    s.horizons = cfg.horizons;
    s.starts = cfg.starts;
    s.z.assign(cfg.horizons.size() * cfg.n_starts(), 1.0);
    return s;
}

// Draws N(0, beta^2 dO) for one window, one connected component at a time.
double draw_window(const std::vector<double>& d_overlap, int n, double beta2,
                   const rng::Philox& gen, std::uint64_t window, std::vector<double>& out,
                   int& largest)
{
    UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (d_overlap[static_cast<std::size_t>(i) * n + j] > 0.0) {
                uf.unite(i, j);
            }
        }
    }
    std::vector<std::vector<int>> comps(n);
    for (int i = 0; i < n; ++i) {
        comps[uf.find(i)].push_back(i);
    }
    double max_jitter = 0.0;
    for (const auto& c : comps) {
        if (c.empty()) {
            continue;
        }
        const int m = static_cast<int>(c.size());
        largest = std::max(largest, m);
        Eigen::VectorXd z(m);
        for (int a = 0; a < m; ++a) {
            z[a] = rng::normal_icdf(gen(static_cast<std::uint64_t>(c[a]), window));
        }
        if (m == 1) {
            out[c[0]] = std::sqrt(beta2 * d_overlap[static_cast<std::size_t>(c[0]) * n + c[0]]) * z[0];
            continue;
        }
        Eigen::MatrixXd cov(m, m);
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                cov(a, b) = beta2 * d_overlap[static_cast<std::size_t>(c[a]) * n + c[b]];
            }
        }
        const double scale = cov.trace() / m;
        double jitter = 1e-10;
        Eigen::LLT<Eigen::MatrixXd> llt;
        while (true) {
            Eigen::MatrixXd jittered = cov;
            jittered.diagonal().array() += jitter * scale;
            llt.compute(jittered);
            if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().allFinite()) {
                break;
            }
            jitter *= 10.0;
            if (jitter > 1e-6 * (1.0 + 1e-9)) {
                throw std::runtime_error("gram backend: overlap matrix indefinite beyond jitter budget");
            }
        }
        max_jitter = std::max(max_jitter, jitter);
        const Eigen::VectorXd g = llt.matrixL() * z;
        for (int a = 0; a < m; ++a) {
            out[c[a]] = g[a];
        }
    }
    return max_jitter;
}

}  // namespace

std::string to_string(Backend b)
{
    return b == Backend::gram ? "gram" : "field";
}

Backend parse_backend(std::string_view s)
{
    if (s == "gram") {
        return Backend::gram;
    }
    if (s == "field") {
        return Backend::field;
    }
    throw std::invalid_argument("unknown backend '" + std::string(s) + "' (expected gram or field)");
}

std::vector<std::string> PolymerConfig::violations() const
{
    std::vector<std::string> out;
    if (d < 3) {
        out.push_back("d must be at least 3");
    }
    if (beta < 0.0 || !std::isfinite(beta)) {
        out.push_back("beta must be a nonnegative real");
    }
    if (!(dt > 0.0)) {
        out.push_back("dt must be positive");
    }
    if (paths_per_start < 1) {
        out.push_back("paths_per_start must be at least 1");
    }
    if (horizons.empty()) {
        out.push_back("horizons must not be empty");
    }
    for (std::size_t k = 0; k < horizons.size(); ++k) {
        if (!(horizons[k] > 0.0)) {
            out.push_back("horizons must be positive");
            break;
        }
        if (k > 0 && horizons[k] <= horizons[k - 1]) {
            out.push_back("horizons must be strictly increasing");
            break;
        }
    }
    if (dt > 0.0) {
        for (double t : horizons) {
            try {
                paths::grid_steps(t, dt);
            } catch (const std::invalid_argument&) {
                out.push_back("horizon " + std::to_string(t) + " is not on the dt grid");
            }
        }
    }
    if (d > 0 && (starts.empty() || starts.size() % static_cast<std::size_t>(d) != 0)) {
        out.push_back("starts must hold a positive multiple of d coordinates");
    }
    return out;
}

void PolymerConfig::validate(const kernels::CovarianceKernel& v) const
{
    const auto bad = violations();
    if (!bad.empty()) {
        std::ostringstream os;
        os << "invalid polymer configuration:";
        for (const auto& s : bad) {
            os << ' ' << s << ';';
        }
        throw std::invalid_argument(os.str());
    }
    if (v.dimension() != d) {
        throw std::invalid_argument("polymer configuration and kernel dimensions differ");
    }
    if (beta > 0.0) {
        paths::require_admissible(beta, v);
    }
}

double PolymerSample::log_at(std::size_t k, int m) const
{
    return std::log(at(k, m));
}

std::uint64_t replica_seed(std::uint64_t master, std::int64_t replica)
{
    return rng::derive_key(master, 0x7265706c6963ull, static_cast<std::uint64_t>(replica));
}

GramRealization realize_gram(const PolymerConfig& cfg, const kernels::CovarianceKernel& v,
                             std::int64_t replica)
{
    if (cfg.backend != Backend::gram) {
        throw std::invalid_argument("realize_gram: configuration backend is not gram");
    }
    cfg.validate(v);
    const std::uint64_t seed = replica_seed(cfg.seed, replica);
    const int n = cfg.n_paths();
    const int d = cfg.d;
    const std::size_t kk = cfg.horizons.size();
    const auto steps = horizon_steps(cfg);
    const double beta2 = cfg.beta * cfg.beta;

    GramRealization g;
    g.sample = empty_sample(cfg, replica);
    g.paths_per_start = cfg.paths_per_start;
    g.n_paths = n;
    g.gauss.assign(kk * n, 0.0);
    g.endpoints.reserve(kk * n * d);

    paths::PathStepper stepper(d, cfg.dt, path_starts(cfg), rng::derive_key(seed, kGramPathTag));
    paths::OverlapAccumulator acc(d, n, v);
    // Without disorder the overlaps never enter Z, so only the endpoints are tracked.
    const bool overlaps = beta2 > 0.0;
    if (overlaps) {
        acc.add(stepper.positions(), 0.5 * cfg.dt);
    }
    for (std::size_t k = 0; k < kk; ++k) {
        while (stepper.step() < steps[k]) {
            stepper.advance();
            if (!overlaps) {
                if (stepper.step() == steps[k]) {
                    g.overlaps.emplace_back(static_cast<std::size_t>(n) * n, 0.0);
                    const auto p = stepper.positions();
                    g.endpoints.insert(g.endpoints.end(), p.begin(), p.end());
                }
                continue;
            }
            if (stepper.step() == steps[k]) {
                acc.add(stepper.positions(), 0.5 * cfg.dt);
                g.overlaps.push_back(acc.snapshot(cfg.horizons[k] * v.v0()));
                const auto p = stepper.positions();
                g.endpoints.insert(g.endpoints.end(), p.begin(), p.end());
                if (k + 1 < kk) {
                    acc.add(stepper.positions(), 0.5 * cfg.dt);
                }
            } else {
                acc.add(stepper.positions(), cfg.dt);
            }
        }
    }

    const rng::Philox gen(rng::derive_key(seed, kGaussTag));
    std::vector<double> delta(static_cast<std::size_t>(n) * n);
    std::vector<double> draw(n);
    std::vector<double> running(n, 0.0);
    for (std::size_t k = 0; k < kk; ++k) {
        for (std::size_t e = 0; e < delta.size(); ++e) {
            delta[e] = g.overlaps[k][e] - (k > 0 ? g.overlaps[k - 1][e] : 0.0);
        }
        if (beta2 > 0.0) {
            const double jitter =
                draw_window(delta, n, beta2, gen, k, draw, g.sample.diag.largest_component);
            g.sample.diag.max_jitter = std::max(g.sample.diag.max_jitter, jitter);
        }
        ++g.sample.diag.windows;
        for (int i = 0; i < n; ++i) {
            running[i] += beta2 > 0.0 ? draw[i] : 0.0;
            g.gauss[k * n + i] = running[i];
        }
        const double comp = 0.5 * beta2 * cfg.horizons[k] * v.v0();
        for (int m = 0; m < cfg.n_starts(); ++m) {
            double s = 0.0;
            for (int i = m * cfg.paths_per_start; i < (m + 1) * cfg.paths_per_start; ++i) {
                s += std::exp(running[i] - comp);
            }
            g.sample.z[k * cfg.n_starts() + m] = s / cfg.paths_per_start;
        }
    }
    return g;
}

PolymerSample sample_polymer_gram(const PolymerConfig& cfg, const kernels::CovarianceKernel& v,
                                  std::int64_t replica)
{
    return realize_gram(cfg, v, replica).sample;
}

env::LatticeSpec default_lattice(const PolymerConfig& cfg, double dx)
{
    double extent = 0.0;
    for (double c : cfg.starts) {
        extent = std::max(extent, std::abs(c));
    }
    env::LatticeSpec s = env::LatticeSpec::for_horizon(cfg.d, dx, cfg.dt, cfg.horizons.back(),
                                                       cfg.horizons.back());
    s.box += 2.0 * std::ceil(extent / dx - 1e-9) * dx;
    return s;
}

PolymerSample sample_polymer_field(const PolymerConfig& cfg, const env::LatticeSpec& lattice,
                                   const kernels::Mollifier& m, std::int64_t replica)
{
    if (cfg.backend != Backend::field) {
        throw std::invalid_argument("sample_polymer_field: configuration backend is not field");
    }
    const auto bad = cfg.violations();
    if (!bad.empty()) {
        throw std::invalid_argument("sample_polymer_field: invalid configuration: " + bad.front());
    }
    lattice.validate(1.0);
    if (lattice.d != cfg.d || m.dimension() != cfg.d) {
        throw std::invalid_argument("sample_polymer_field: lattice, mollifier and walkers disagree on d");
    }
    if (std::abs(lattice.dt - cfg.dt) > 1e-12 * cfg.dt) {
        throw std::invalid_argument("sample_polymer_field: lattice and walker time steps differ");
    }
    if (lattice.horizon < cfg.horizons.back() * (1.0 - 1e-12)) {
        throw std::invalid_argument("sample_polymer_field: lattice horizon shorter than the last horizon");
    }
    const std::uint64_t seed = replica_seed(cfg.seed, replica);
    const int n = cfg.n_paths();
    const int d = cfg.d;
    const auto steps = horizon_steps(cfg);
    PolymerSample out = empty_sample(cfg, replica);
    if (cfg.beta == 0.0) {
        return out;
    }
    const env::NoiseField noise(lattice, rng::derive_key(seed, kFieldNoiseTag));
    paths::PathStepper stepper(d, cfg.dt, path_starts(cfg), rng::derive_key(seed, kFieldPathTag));

    const double beta = cfg.beta;
    const double vol = std::pow(lattice.dx, d);
    const double half_box = 0.5 * lattice.box;
    const std::int64_t side = lattice.cells_per_side();
    const double reach = kernels::Mollifier::support_radius;
    std::vector<double> exponent(n, 0.0);
    std::vector<char> wrapped(n, 0);
    std::vector<std::int64_t> lo(d), hi(d), idx(d);

    std::size_t next = 0;
    for (std::int64_t k = 0; k < steps.back(); ++k) {
        const auto pos = stepper.positions();
        for (int i = 0; i < n; ++i) {
            const double* w = pos.data() + static_cast<std::size_t>(i) * d;
            for (int c = 0; c < d; ++c) {
                if (w[c] < -half_box || w[c] >= half_box) {
                    wrapped[i] = 1;
                }
                lo[c] = static_cast<std::int64_t>(std::ceil((w[c] - reach + half_box) / lattice.dx));
                hi[c] = static_cast<std::int64_t>(std::floor((w[c] + reach + half_box) / lattice.dx));
                idx[c] = lo[c];
            }
            double a = 0.0;
            double q = 0.0;
            while (true) {
                double r2 = 0.0;
                std::int64_t linear = 0;
                std::int64_t stride = 1;
                for (int c = 0; c < d; ++c) {
                    const double diff = w[c] - lattice.coordinate(idx[c]);
                    r2 += diff * diff;
                    std::int64_t wc = idx[c] % side;
                    linear += (wc < 0 ? wc + side : wc) * stride;
                    stride *= side;
                }
                if (r2 < reach * reach) {
                    const double phi = m.radial(std::sqrt(r2));
                    a += phi * noise.cell(k, linear);
                    q += phi * phi;
                }
                int c = 0;
                while (c < d && ++idx[c] > hi[c]) {
                    idx[c] = lo[c];
                    ++c;
                }
                if (c == d) {
                    break;
                }
            }
            // The local lattice variance q replaces V(0) in the compensator so each
            // discrete step is an exact mean-one multiplicative martingale increment.
            exponent[i] += beta * a * vol * cfg.dt - 0.5 * beta * beta * q * vol * cfg.dt;
        }
        stepper.advance();
        while (next < steps.size() && stepper.step() == steps[next]) {
            for (int s = 0; s < cfg.n_starts(); ++s) {
                double sum = 0.0;
                for (int i = s * cfg.paths_per_start; i < (s + 1) * cfg.paths_per_start; ++i) {
                    sum += std::exp(exponent[i]);
                }
                out.z[next * cfg.n_starts() + s] = sum / cfg.paths_per_start;
            }
            ++next;
        }
    }
    out.diag.wrap_events = std::count(wrapped.begin(), wrapped.end(), 1);
    if (static_cast<double>(out.diag.wrap_events) > cfg.max_wrap_fraction * n) {
        throw std::runtime_error("field backend: walkers left the periodic box above threshold");
    }
    return out;
}

double bracket_derivative(const GramRealization& g, const kernels::CovarianceKernel& v,
                          std::size_t k, int a, int b)
{
    const int np = g.paths_per_start;
    if (np < 2) {
        throw std::invalid_argument("bracket_derivative: need at least two paths per start");
    }
    const double beta2 = g.sample.beta * g.sample.beta;
    if (beta2 == 0.0) {
        return 0.0;
    }
    const int n = g.n_paths;
    const int d = g.sample.d;
    const double comp = beta2 * g.sample.horizons[k] * v.v0();
    double sum = 0.0;
    std::int64_t pairs = 0;
    for (int i = a * np; i < (a + 1) * np; ++i) {
        for (int j = b * np; j < (b + 1) * np; ++j) {
            if (i == j) {
                continue;
            }
            double r2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double diff = g.endpoints[(k * n + i) * d + c] - g.endpoints[(k * n + j) * d + c];
                r2 += diff * diff;
            }
            ++pairs;
            const double vv = v.from_sq(r2);
            if (vv > 0.0) {
                sum += std::exp(g.gauss[k * n + i] + g.gauss[k * n + j] - comp) * vv;
            }
        }
    }
    return beta2 * sum / static_cast<double>(pairs);
}

BracketMoments integrated_bracket_moments(const GramRealization& g,
                                          const kernels::CovarianceKernel& v, std::size_t k,
                                          int start, double c0)
{
    const int np = g.paths_per_start;
    if (np < 4) {
        throw std::invalid_argument("integrated_bracket_moments: need at least four paths per start");
    }
    const int n = g.n_paths;
    const int d = g.sample.d;
    const double beta2 = g.sample.beta * g.sample.beta;
    const double t = g.sample.horizons[k];
    const double scale = std::pow(t, 0.5 * d);
    const int off = start * np;
    Eigen::MatrixXd e(np, np);
    Eigen::MatrixXd ea(np, np);
    for (int i = 0; i < np; ++i) {
        for (int j = 0; j < np; ++j) {
            if (i == j) {
                e(i, j) = 0.0;
                ea(i, j) = 0.0;
                continue;
            }
            double r2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double diff = g.endpoints[(k * n + off + i) * d + c] -
                                    g.endpoints[(k * n + off + j) * d + c];
                r2 += diff * diff;
            }
            e(i, j) = std::exp(beta2 * g.overlap(k, off + i, off + j));
            ea(i, j) = e(i, j) * (beta2 * scale * v.from_sq(r2) - c0);
        }
    }
    BracketMoments out;
    out.mean = ea.sum() / (static_cast<double>(np) * (np - 1));
    double quad_sum = 0.0;
    Eigen::VectorXd u(np);
    for (int i = 0; i < np; ++i) {
        for (int j = i + 1; j < np; ++j) {
            u = e.col(i).cwiseProduct(e.col(j));
            u[i] = 0.0;
            u[j] = 0.0;
            quad_sum += 2.0 * ea(i, j) * u.dot(ea * u);
        }
    }
    const double quads = static_cast<double>(np) * (np - 1) * (np - 2) * (np - 3);
    out.mean_square = quad_sum / quads;
    return out;
}

namespace {

double pair_moment_at(const GramRealization& g, int k, int a, int b)
{
    if (k < 0 || g.sample.beta == 0.0) {
        return 1.0;
    }
    const int np = g.paths_per_start;
    const double beta2 = g.sample.beta * g.sample.beta;
    double sum = 0.0;
    std::int64_t pairs = 0;
    for (int i = a * np; i < (a + 1) * np; ++i) {
        for (int j = b * np; j < (b + 1) * np; ++j) {
            if (i != j) {
                sum += std::exp(beta2 * g.overlap(static_cast<std::size_t>(k), i, j));
                ++pairs;
            }
        }
    }
    return sum / static_cast<double>(pairs);
}

}  // namespace

double integrated_pair_moment(const GramRealization& g, std::size_t k, int a, int b)
{
    if (g.paths_per_start < 2 && a == b) {
        throw std::invalid_argument("integrated_pair_moment: need two paths for a same-start pair");
    }
    return pair_moment_at(g, static_cast<int>(k), a, b);
}

double integrated_increment_moment(const GramRealization& g, int a0, int a1, int b0, int b1,
                                   int a, int b)
{
    if (!(a0 < a1 && b0 < b1)) {
        throw std::invalid_argument("integrated_increment_moment: horizon indices must increase");
    }
    return pair_moment_at(g, std::min(a1, b1), a, b) - pair_moment_at(g, std::min(a1, b0), a, b) -
           pair_moment_at(g, std::min(a0, b1), a, b) + pair_moment_at(g, std::min(a0, b0), a, b);
}

}  // namespace pshe::polymer
