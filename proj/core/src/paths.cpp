#include "pshe/paths.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "pshe/quadrature.hpp"

namespace pshe::paths {

namespace {

constexpr std::uint64_t kPathTag = 0x70617468ull;
constexpr std::uint64_t kFunctionalTag = 0x66756e63ull;

}  // namespace

std::int64_t grid_steps(double t, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("dt must be positive");
    }
    if (t < 0.0) {
        throw std::invalid_argument("horizon must be nonnegative");
    }
    const double q = t / dt;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, q)) {
        throw std::invalid_argument("horizon " + std::to_string(t) + " is not on the dt grid");
    }
    return static_cast<std::int64_t>(r);
}

PathStepper::PathStepper(int d, double dt, std::vector<double> starts, std::uint64_t seed)
    : d_(d),
      n_(static_cast<int>(starts.size()) / d),
      dt_(dt),
      sd_(std::sqrt(dt)),
      gen_(rng::derive_key(seed, kPathTag)),
      pos_(std::move(starts))
{
    if (d < 1 || pos_.size() % static_cast<std::size_t>(d) != 0) {
        throw std::invalid_argument("PathStepper: starts must hold n*d coordinates");
    }
}

void PathStepper::advance()
{
    const int blocks = (d_ + 3) / 4;
    for (int i = 0; i < n_; ++i) {
        double* x = pos_.data() + static_cast<std::size_t>(i) * d_;
        for (int b = 0; b < blocks; ++b) {
            const auto z = rng::box_muller4(
                gen_(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(step_ * blocks + b)));
            for (int c = 4 * b; c < std::min(d_, 4 * b + 4); ++c) {
                x[c] += sd_ * z[c - 4 * b];
            }
        }
    }
    ++step_;
}

PathEnsemble sample_paths(int d, int n, double dt, const std::vector<double>& horizons,
                          const std::vector<double>& starts, std::uint64_t seed)
{
    if (n < 1) {
        throw std::invalid_argument("sample_paths: need at least one path");
    }
    if (horizons.empty()) {
        throw std::invalid_argument("sample_paths: horizon list is empty");
    }
    PathEnsemble e;
    e.d = d;
    e.n_paths = n;
    e.dt = dt;
    e.horizons = horizons;
    for (std::size_t k = 0; k < horizons.size(); ++k) {
        e.horizon_steps.push_back(grid_steps(horizons[k], dt));
        if (k > 0 && e.horizon_steps[k] <= e.horizon_steps[k - 1]) {
            throw std::invalid_argument("sample_paths: horizons must be strictly increasing");
        }
    }
    if (starts.size() == static_cast<std::size_t>(d)) {
        for (int i = 0; i < n; ++i) {
            e.starts.insert(e.starts.end(), starts.begin(), starts.end());
        }
    } else if (starts.size() == static_cast<std::size_t>(n) * d) {
        e.starts = starts;
    } else {
        throw std::invalid_argument("sample_paths: starts must hold d or n*d coordinates");
    }
    PathStepper stepper(d, dt, e.starts, seed);
    const std::int64_t total = e.steps();
    e.positions.reserve(static_cast<std::size_t>((total + 1) * n * d));
    e.positions.insert(e.positions.end(), e.starts.begin(), e.starts.end());
    for (std::int64_t s = 0; s < total; ++s) {
        stepper.advance();
        const auto p = stepper.positions();
        e.positions.insert(e.positions.end(), p.begin(), p.end());
    }
    return e;
}

OverlapAccumulator::OverlapAccumulator(int d, int n, const kernels::CovarianceKernel& v)
    : d_(d), n_(n), v_(&v), acc_(static_cast<std::size_t>(n) * n, 0.0), order_(n)
{
    for (int i = 0; i < n; ++i) {
        order_[i] = i;
    }
}

void OverlapAccumulator::add(std::span<const double> positions, double weight)
{
    const double* x = positions.data();
    auto key = [&](int i) { return x[static_cast<std::size_t>(i) * d_]; };
    // Insertion sort stays near linear because paths move little between steps.
    for (int a = 1; a < n_; ++a) {
        const int i = order_[a];
        const double ki = key(i);
        int b = a - 1;
        while (b >= 0 && key(order_[b]) > ki) {
            order_[b + 1] = order_[b];
            --b;
        }
        order_[b + 1] = i;
    }
    for (int a = 0; a < n_; ++a) {
        const int i = order_[a];
        const double* xi = x + static_cast<std::size_t>(i) * d_;
        for (int b = a + 1; b < n_; ++b) {
            const int j = order_[b];
            const double* xj = x + static_cast<std::size_t>(j) * d_;
            const double d0 = xj[0] - xi[0];
            if (d0 >= 1.0) {
                break;
            }
            double r2 = d0 * d0;
            for (int c = 1; c < d_ && r2 < 1.0; ++c) {
                const double dc = xj[c] - xi[c];
                r2 += dc * dc;
            }
            if (r2 < 1.0) {
                const int lo = std::min(i, j);
                const int hi = std::max(i, j);
                acc_[static_cast<std::size_t>(lo) * n_ + hi] += weight * v_->from_sq(r2);
            }
        }
    }
}

std::vector<double> OverlapAccumulator::snapshot(double diagonal) const
{
    std::vector<double> m(acc_.size());
    for (int i = 0; i < n_; ++i) {
        m[static_cast<std::size_t>(i) * n_ + i] = diagonal;
        for (int j = i + 1; j < n_; ++j) {
            const double v = acc_[static_cast<std::size_t>(i) * n_ + j];
            m[static_cast<std::size_t>(i) * n_ + j] = v;
            m[static_cast<std::size_t>(j) * n_ + i] = v;
        }
    }
    return m;
}

void OverlapAccumulator::reset()
{
    std::fill(acc_.begin(), acc_.end(), 0.0);
}

OverlapGram overlap_gram(const PathEnsemble& e, const kernels::CovarianceKernel& v)
{
    if (v.dimension() != e.d) {
        throw std::invalid_argument("overlap_gram: kernel and ensemble dimensions differ");
    }
    OverlapGram g;
    g.n = e.n_paths;
    g.horizons = e.horizons;
    OverlapAccumulator acc(e.d, e.n_paths, v);
    auto slice = [&](std::int64_t s) {
        return std::span<const double>(e.positions.data() + s * e.n_paths * e.d,
                                       static_cast<std::size_t>(e.n_paths * e.d));
    };
    std::size_t k = 0;
    while (k < e.horizon_steps.size() && e.horizon_steps[k] == 0) {
        g.matrices.push_back(acc.snapshot(0.0));
        ++k;
    }
    if (k == e.horizon_steps.size()) {
        return g;
    }
    acc.add(slice(0), 0.5 * e.dt);
    for (std::int64_t s = 1; s <= e.steps(); ++s) {
        if (s == e.horizon_steps[k]) {
            acc.add(slice(s), 0.5 * e.dt);
            g.matrices.push_back(acc.snapshot(e.horizons[k] * v.v0()));
            ++k;
            if (s < e.steps()) {
                acc.add(slice(s), 0.5 * e.dt);
            }
        } else {
            acc.add(slice(s), e.dt);
        }
    }
    return g;
}

FunctionalEstimate diffusion_functional(std::span<const double> u0, double beta,
                                        const kernels::CovarianceKernel& v,
                                        const FunctionalOptions& opt)
{
    if (opt.s_max < 64.0) {
        throw std::invalid_argument("exp_functional: s_max must be at least 64");
    }
    if (opt.n_samples < 2) {
        throw std::invalid_argument("exp_functional: need at least two samples");
    }
    const int d = static_cast<int>(u0.size());
    if (d != v.dimension()) {
        throw std::invalid_argument("exp_functional: point and kernel dimensions differ");
    }
    FunctionalEstimate est;
    est.n_samples = opt.n_samples;
    if (beta == 0.0) {
        return est;
    }
    if (opt.check_admissible) {
        require_admissible(beta, v);
    }
    const double b2 = beta * beta;
    const double half = 0.5 * opt.s_max;
    const rng::Philox gen(rng::derive_key(opt.seed, kFunctionalTag));
    // Fine steps inside this radius; beyond it the step keeps kappa standard deviations
    // between the walker and the support.
    const double fine_radius = 1.0 + opt.kappa * std::sqrt(2.0 * opt.dt);
    const double inv_kappa2 = 1.0 / (opt.kappa * opt.kappa);

    double sum = 0.0, sum2 = 0.0, sum_h = 0.0, sum_h2 = 0.0, sum_d = 0.0, sum_d2 = 0.0;
    std::vector<double> x(d);
    for (std::int64_t n = 0; n < opt.n_samples; ++n) {
        std::copy(u0.begin(), u0.end(), x.begin());
        double s = 0.0;
        double area = 0.0;
        double area_half = -1.0;
        double r2 = 0.0;
        for (double c : x) {
            r2 += c * c;
        }
        double f_prev = v.from_sq(r2);
        std::uint64_t block = 0;
        std::array<double, 4> z{};
        int zpos = 4;
        while (s < opt.s_max) {
            const double r = std::sqrt(r2);
            double h = opt.dt;
            if (r > fine_radius) {
                h = std::max(opt.dt, 0.5 * (r - 1.0) * (r - 1.0) * inv_kappa2);
            }
            const double target = s < half ? half : opt.s_max;
            if (s + h >= target - 1e-12 * target) {
                h = target - s;
            }
            const double sd = std::sqrt(2.0 * h);
            r2 = 0.0;
            for (int c = 0; c < d; ++c) {
                if (zpos == 4) {
                    z = rng::box_muller4(gen(static_cast<std::uint64_t>(n), block++));
                    zpos = 0;
                }
                x[c] += sd * z[zpos++];
                r2 += x[c] * x[c];
            }
            const double f = v.from_sq(r2);
            area += 0.5 * h * (f_prev + f);
            f_prev = f;
            s = (h == target - s) ? target : s + h;
            if (area_half < 0.0 && s >= half) {
                area_half = area;
            }
        }
        const double w = std::exp(b2 * area);
        const double wh = std::exp(b2 * area_half);
        sum += w;
        sum2 += w * w;
        sum_h += wh;
        sum_h2 += wh * wh;
        sum_d += w - wh;
        sum_d2 += (w - wh) * (w - wh);
    }
    const double n = static_cast<double>(opt.n_samples);
    auto se = [n](double s1, double s2) {
        const double mean = s1 / n;
        return std::sqrt(std::max(0.0, (s2 / n - mean * mean) / (n - 1.0)));
    };
    est.value = sum / n;
    est.se = se(sum, sum2);
    est.half_value = sum_h / n;
    est.half_se = se(sum_h, sum_h2);
    est.truncation_diff = sum_d / n;
    est.truncation_se = se(sum_d, sum_d2);
    est.flagged = est.truncation_diff > 3.0 * est.truncation_se && est.truncation_se > 0.0;
    return est;
}

FunctionalEstimate exp_functional(std::span<const double> y, double beta,
                                  const kernels::CovarianceKernel& v, const FunctionalOptions& opt)
{
    std::vector<double> u0(y.begin(), y.end());
    for (double& c : u0) {
        c *= std::numbers::sqrt2;
    }
    return diffusion_functional(u0, beta, v, opt);
}

namespace {

double khasminskii_integral(const kernels::CovarianceKernel& v)
{
    const int d = v.dimension();
    // Time integral of rho(s, r) over s in (0, inf) equals 2 * int rho(2 sigma, r) d sigma.
    auto integrand = [&](double r) {
        if (r == 0.0) {
            return 0.0;
        }
        return std::pow(r, d - 1) * v.radial(std::numbers::sqrt2 * r) * 2.0 *
               kernels::heat_time_integral_closed(d, r);
    };
    return kernels::sphere_area(d) *
           quad::integrate(integrand, 0.0, 1.0 / std::numbers::sqrt2, {1e-12, 1e-10, 24}).value;
}

}  // namespace

double khasminskii_margin(double beta, const kernels::CovarianceKernel& v)
{
    if (beta == 0.0) {
        return 0.0;
    }
    // The integral depends on the kernel only; remember the last few kernels seen.
    static std::mutex mutex;
    static std::vector<std::pair<std::vector<double>, double>> cache;
    double integral = 0.0;
    {
        std::lock_guard<std::mutex> lock(mutex);
        const auto it = std::find_if(cache.begin(), cache.end(),
                                     [&](const auto& e) { return e.first == v.values(); });
        if (it != cache.end()) {
            return 2.0 * beta * beta * it->second;
        }
    }
    integral = khasminskii_integral(v);
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() >= 4) {
        cache.erase(cache.begin());
    }
    cache.emplace_back(v.values(), integral);
    return 2.0 * beta * beta * integral;
}

void require_admissible(double beta, const kernels::CovarianceKernel& v)
{
    const double m = khasminskii_margin(beta, v);
    if (m >= 1.0) {
        throw InadmissibleBeta("beta " + std::to_string(beta) + " is inadmissible: margin " +
                               std::to_string(m) + " >= 1");
    }
}

}  // namespace pshe::paths
