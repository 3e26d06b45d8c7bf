#include "pshe/kernels.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>

#include <boost/math/special_functions/gamma.hpp>

#include "pshe/quadrature.hpp"

namespace pshe::kernels {

namespace {
constexpr quad::Tolerance kFine{1e-14, 1e-12, 24};
constexpr quad::Tolerance kTable{1e-11, 1e-10, 24};
}

double sphere_area(int n)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double norm(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

Mollifier::Mollifier(int d, int resolution) : d_(d), c_(1.0)
{
    if (d < 3) {
        throw std::invalid_argument("make_mollifier: dimension must be at least 3");
    }
    if (resolution < 64) {
        throw std::invalid_argument("make_mollifier: resolution must be at least 64");
    }
    const double mass =
        sphere_area(d) *
        quad::integrate([&](double r) { return std::pow(r, d - 1) * radial(r); }, 0.0, 0.5, kFine)
            .value;
    c_ = 1.0 / mass;
    table_.resize(resolution);
    for (int k = 0; k < resolution; ++k) {
        table_[k] = radial(table_radius(k));
    }
}

Mollifier make_mollifier(int d, int resolution)
{
    return Mollifier(d, resolution);
}

CovarianceKernel::CovarianceKernel(int d, std::vector<double> values)
    : d_(d), values_(std::move(values))
{
    const int n = static_cast<int>(values_.size());
    if (n < 2) {
        throw std::invalid_argument("CovarianceKernel: table needs at least two samples");
    }
    h_ = 1.0 / (n - 1);
    inv_h_ = n - 1;
    // Fritsch-Carlson monotone slopes; zero slope at the origin by symmetry.
    std::vector<double> delta(n - 1);
    for (int k = 0; k + 1 < n; ++k) {
        delta[k] = (values_[k + 1] - values_[k]) * inv_h_;
    }
    slopes_.assign(n, 0.0);
    for (int k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] > 0.0) {
            const double w1 = 2.0 * delta[k] + delta[k - 1];
            const double w2 = delta[k] + 2.0 * delta[k - 1];
            slopes_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    slopes_[n - 1] = 0.0;
}

double convolve_radial(const Mollifier& m, double r)
{
    const int d = m.dimension();
    const double half = Mollifier::support_radius;
    if (r >= 2.0 * half) {
        return 0.0;
    }
    if (r == 0.0) {
        return sphere_area(d) *
               quad::integrate(
                   [&](double s) {
                       const double p = m.radial(s);
                       return std::pow(s, d - 1) * p * p;
                   },
                   0.0, half, kFine)
                   .value;
    }
    const double ring = sphere_area(d - 1);
    auto outer = [&](double s) {
        const double ps = m.radial(s);
        if (ps == 0.0 || s == 0.0) {
            return 0.0;
        }
        const double c = (r * r + s * s - half * half) / (2.0 * r * s);
        if (c >= 1.0) {
            return 0.0;
        }
        const double theta_max = c <= -1.0 ? std::numbers::pi : std::acos(c);
        auto inner = [&](double theta) {
            const double q = r * r + s * s - 2.0 * r * s * std::cos(theta);
            return std::pow(std::sin(theta), d - 2) * m.radial(std::sqrt(std::max(q, 0.0)));
        };
        return std::pow(s, d - 1) * ps * quad::integrate(inner, 0.0, theta_max, kTable).value;
    };
    return ring * quad::integrate(outer, std::max(0.0, r - half), half, kTable).value;
}

namespace {

// Tensor Gauss-Legendre evaluation of the radial convolution; agrees with the
// adaptive form to about 1e-13 because the bump is smooth up to its support edge.
double convolve_radial_gl(const Mollifier& m, double r, const quad::Rule& outer_ref,
                          const quad::Rule& inner_ref)
{
    const int d = m.dimension();
    const double half = Mollifier::support_radius;
    if (r >= 2.0 * half) {
        return 0.0;
    }
    const double lo = std::max(0.0, r - half);
    const double so = 0.5 * (half - lo);
    double total = 0.0;
    for (std::size_t a = 0; a < outer_ref.nodes.size(); ++a) {
        const double s = lo + so * (outer_ref.nodes[a] + 1.0);
        const double ps = m.radial(s);
        if (ps == 0.0) {
            continue;
        }
        double inner = 0.0;
        if (r == 0.0) {
            inner = sphere_area(d) / sphere_area(d - 1) * ps;
        } else {
            const double c = (r * r + s * s - half * half) / (2.0 * r * s);
            if (c >= 1.0) {
                continue;
            }
            const double theta_max = c <= -1.0 ? std::numbers::pi : std::acos(c);
            const double si = 0.5 * theta_max;
            for (std::size_t b = 0; b < inner_ref.nodes.size(); ++b) {
                const double theta = si * (inner_ref.nodes[b] + 1.0);
                const double q = r * r + s * s - 2.0 * r * s * std::cos(theta);
                inner += inner_ref.weights[b] * si * std::pow(std::sin(theta), d - 2) *
                         m.radial(std::sqrt(std::max(q, 0.0)));
            }
        }
        total += outer_ref.weights[a] * so * std::pow(s, d - 1) * ps * inner;
    }
    return sphere_area(d - 1) * total;
}

}  // namespace

CovarianceKernel autocorrelate(const Mollifier& m, int resolution)
{
    if (resolution < 64) {
        throw std::invalid_argument("autocorrelate: resolution must be at least 64");
    }
    const quad::Rule outer = quad::gauss_legendre(128, -1.0, 1.0);
    const quad::Rule inner = quad::gauss_legendre(96, -1.0, 1.0);
    std::vector<double> values(resolution);
    for (int k = 0; k < resolution; ++k) {
        values[k] = convolve_radial_gl(m, static_cast<double>(k) / (resolution - 1), outer, inner);
    }
    values.back() = 0.0;
    return CovarianceKernel(m.dimension(), std::move(values));
}

double heat_kernel_radial(int d, double t, double r)
{
    if (!(t > 0.0)) {
        throw std::invalid_argument("heat_kernel: t must be positive");
    }
    return std::pow(2.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-r * r / (2.0 * t));
}

double heat_kernel(int d, double t, std::span<const double> x)
{
    return heat_kernel_radial(d, t, norm(x));
}

namespace {

// int_{u0}^inf (2 pi u)^{-d/2} exp(-a/u) du with a = r^2 / 2.
double heat_tail(int d, double r, double u0)
{
    const double s = 0.5 * d - 1.0;
    const double pref = std::pow(2.0 * std::numbers::pi, -0.5 * d);
    const double a = 0.5 * r * r;
    const double z = a / u0;
    if (z < 1e-12) {
        return pref * std::pow(u0, -s) / s * (1.0 - s / (s + 1.0) * z);
    }
    return pref * std::pow(a, -s) * boost::math::tgamma_lower(s, z);
}

}  // namespace

double heat_time_integral_closed(int d, double r, double offset)
{
    if (d < 3) {
        throw std::invalid_argument("heat_time_integral: dimension must be at least 3");
    }
    if (offset == 0.0) {
        if (r == 0.0) {
            throw std::domain_error("heat_time_integral: diverges at r = 0 with zero offset");
        }
        const double s = 0.5 * d - 1.0;
        return 0.5 * std::pow(2.0 * std::numbers::pi, -0.5 * d) * std::pow(0.5 * r * r, -s) *
               std::tgamma(s);
    }
    return 0.5 * heat_tail(d, r, offset);
}

double heat_time_integral_finite(int d, double r, double offset, double a, double b)
{
    if (b <= a) {
        return 0.0;
    }
    auto f = [&](double v) {
        const double u = 2.0 * v + offset;
        return u > 0.0 ? heat_kernel_radial(d, u, r) : 0.0;
    };
    // Panels refine geometrically towards the peak near u = r^2/d and the left end.
    const double peak = std::max(r * r / d, offset);
    if (!(peak > 0.0)) {
        throw std::domain_error("heat_time_integral: diverges at r = 0 with zero offset");
    }
    std::vector<double> pts{a};
    for (double p = peak / 64.0; p < 64.0 * std::max(peak, b - a); p *= 4.0) {
        const double v = a + p;
        if (v > a && v < b) {
            pts.push_back(v);
        }
    }
    pts.push_back(b);
    return quad::integrate_panels(f, pts, kFine).value;
}

double heat_time_integral(int d, double r, double offset)
{
    if (d < 3) {
        throw std::invalid_argument("heat_time_integral: dimension must be at least 3");
    }
    if (offset < 0.0) {
        throw std::invalid_argument("heat_time_integral: offset must be nonnegative");
    }
    if (offset == 0.0 && r == 0.0) {
        throw std::domain_error("heat_time_integral: diverges at r = 0 with zero offset");
    }
    const double cut = 1e4 * std::max({r * r, offset, 1e-2});
    const double body = heat_time_integral_finite(d, r, offset, 0.0, cut);
    return body + 0.5 * heat_tail(d, r, 2.0 * cut + offset);
}

void write_radial_csv(std::ostream& os, const std::vector<double>& radii,
                      const std::vector<double>& values)
{
    os << "r,value\n";
    os.precision(17);
    for (std::size_t k = 0; k < radii.size() && k < values.size(); ++k) {
        os << radii[k] << ',' << values[k] << '\n';
    }
}

void write_radial_csv(std::ostream& os, const Mollifier& m)
{
    std::vector<double> r(m.resolution());
    for (int k = 0; k < m.resolution(); ++k) {
        r[k] = m.table_radius(k);
    }
    write_radial_csv(os, r, m.table());
}

void write_radial_csv(std::ostream& os, const CovarianceKernel& v)
{
    std::vector<double> r(v.resolution());
    for (int k = 0; k < v.resolution(); ++k) {
        r[k] = v.table_radius(k);
    }
    write_radial_csv(os, r, v.values());
}

}  // namespace pshe::kernels
