#include "pshe/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "pshe/kernels.hpp"
#include "pshe/rng.hpp"

namespace pshe::limits {

namespace {

constexpr std::uint64_t kSampleTag = 0x4c494d4954ull;

double distance(const SpaceTimePoint& p, const SpaceTimePoint& q)
{
    if (p.x.size() != q.x.size() || p.x.size() < 3) {
        throw std::invalid_argument("limits: points must share a dimension of at least 3");
    }
    double s = 0.0;
    for (std::size_t c = 0; c < p.x.size(); ++c) {
        const double u = p.x[c] - q.x[c];
        s += u * u;
    }
    return std::sqrt(s);
}

void check_times(const SpaceTimePoint& p, const SpaceTimePoint& q, Smoothing sm)
{
    if (!(p.t >= 0.0) || !(q.t >= 0.0)) {
        throw std::invalid_argument("limits: times must be nonnegative");
    }
    if (!(sm.variance >= 0.0)) {
        throw std::invalid_argument("limits: smoothing variance must be nonnegative");
    }
}

}  // namespace

std::string to_string(Field f)
{
    switch (f) {
    case Field::H:
        return "H";
    case Field::Hbar:
        return "Hbar";
    case Field::Hst:
        return "Hst";
    }
    return "H";
}

Field parse_field(const std::string& s)
{
    if (s == "H") {
        return Field::H;
    }
    if (s == "Hbar") {
        return Field::Hbar;
    }
    if (s == "Hst") {
        return Field::Hst;
    }
    throw std::invalid_argument("unknown field '" + s + "' (expected H, Hbar or Hst)");
}

double cov_H(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq, Smoothing sm)
{
    check_times(p, q, sm);
    const double r = distance(p, q);
    if (gamma_sq == 0.0) {
        return 0.0;
    }
    const int d = static_cast<int>(p.x.size());
    return gamma_sq * kernels::heat_time_integral(d, r, p.t + q.t + 2.0 * sm.variance);
}

double cov_H_horizon(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq,
                     double horizon, Smoothing sm)
{
    check_times(p, q, sm);
    const double r = distance(p, q);
    const double upper = horizon - 0.5 * (p.t + q.t);
    if (gamma_sq == 0.0 || upper <= 0.0) {
        return 0.0;
    }
    const int d = static_cast<int>(p.x.size());
    const double c = p.t + q.t + 2.0 * sm.variance;
    if (c == 0.0 && r == 0.0) {
        throw std::domain_error("cov_H_horizon: diverges at coincident points at time 0");
    }
    return gamma_sq * kernels::heat_time_integral_finite(d, r, c, 0.0, upper);
}

double cov_free_energy(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq,
                       double horizon)
{
    check_times(p, q, {});
    const double r = distance(p, q);
    const double lo = std::max(p.t, q.t);
    if (gamma_sq == 0.0 || lo >= horizon) {
        return 0.0;
    }
    if (lo == 0.0 && r == 0.0) {
        throw std::domain_error("cov_free_energy: diverges at coincident points at time 0");
    }
    const int d = static_cast<int>(p.x.size());
    // int_lo^H rho(2u, r) du with u = v + lo.
    return gamma_sq * kernels::heat_time_integral_finite(d, r, 2.0 * lo, 0.0, horizon - lo);
}

double cov_Hbar(const SpaceTimePoint& p, const SpaceTimePoint& q, double amp_sq, Smoothing sm)
{
    check_times(p, q, sm);
    const double r = distance(p, q);
    const double m = std::min(p.t, q.t);
    if (amp_sq == 0.0 || m == 0.0) {
        return 0.0;
    }
    const double c = std::abs(p.t - q.t) + 2.0 * sm.variance;
    if (c == 0.0 && r == 0.0) {
        throw std::domain_error(
            "cov_Hbar: the flat-start field has infinite pointwise variance in d >= 3; use "
            "distinct points or a positive smoothing variance");
    }
    const int d = static_cast<int>(p.x.size());
    return amp_sq * kernels::heat_time_integral_finite(d, r, c, 0.0, m);
}

double cov_Hst(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq, double amp_sq,
               Smoothing sm)
{
    const double a = std::isnan(amp_sq) ? gamma_sq : amp_sq;
    return cov_H(p, q, gamma_sq, sm) + cov_Hbar(p, q, a, sm);
}

double gff_closed_form(int d, double r, double gamma_sq)
{
    if (d < 3 || !(r > 0.0)) {
        throw std::invalid_argument("gff_closed_form: need d >= 3 and r > 0");
    }
    return gamma_sq * boost::math::tgamma(0.5 * d - 1.0) /
           (std::pow(std::numbers::pi, 0.5 * d) * std::pow(r, d - 2));
}

double gff_prefactor_ratio(int d, double r)
{
    return kernels::heat_time_integral(d, r, 0.0) / gff_closed_form(d, r, 1.0);
}

GaussianLimitSpec make_limit_spec(Field field, int d, std::vector<SpaceTimePoint> points,
                                  double gamma_sq, double gbar_sq, double amp_sq, Smoothing sm)
{
    if (points.empty()) {
        throw std::invalid_argument("make_limit_spec: no points");
    }
    for (const auto& p : points) {
        if (static_cast<int>(p.x.size()) != d) {
            throw std::invalid_argument("make_limit_spec: point dimension differs from d");
        }
    }
    GaussianLimitSpec s;
    s.field = field;
    s.d = d;
    s.gamma_sq = gamma_sq;
    s.gbar_sq = gbar_sq;
    s.amp_sq = std::isnan(amp_sq) ? gamma_sq : amp_sq;
    s.smoothing = sm;
    s.points = std::move(points);
    const auto n = static_cast<Eigen::Index>(s.points.size());
    s.covariance.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const auto& p = s.points[i];
            const auto& q = s.points[j];
            double c = 0.0;
            switch (field) {
            case Field::H:
                c = cov_H(p, q, gamma_sq, sm);
                break;
            case Field::Hbar:
                c = cov_Hbar(p, q, s.amp_sq, sm);
                break;
            case Field::Hst:
                c = cov_Hst(p, q, gamma_sq, s.amp_sq, sm);
                break;
            }
            s.covariance(i, j) = c;
            s.covariance(j, i) = c;
        }
    }
    return s;
}

LimitSamples sample_limit(const GaussianLimitSpec& spec, std::int64_t n, std::uint64_t seed)
{
    const Eigen::Index m = spec.covariance.rows();
    if (n < 0) {
        throw std::invalid_argument("sample_limit: negative sample count");
    }
    LimitSamples out;
    out.values = Eigen::MatrixXd::Zero(n, m);
    const double trace = spec.covariance.trace();
    if (trace == 0.0 && spec.covariance.isZero(0.0)) {
        return out;
    }
    const double cap = 1e-10 * trace / static_cast<double>(m);
    Eigen::MatrixXd l;
    for (double jitter = 0.0;; jitter = jitter == 0.0 ? cap * 1e-4 : jitter * 10.0) {
        if (jitter > cap * (1.0 + 1e-12)) {
            throw NotPositiveSemidefinite(
                "sample_limit: covariance is not positive semidefinite within jitter");
        }
        Eigen::MatrixXd c = spec.covariance;
        c.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() == Eigen::Success) {
            l = llt.matrixL();
            out.jitter = jitter;
            break;
        }
    }
    const rng::Philox gen(rng::derive_key(seed, kSampleTag));
    Eigen::VectorXd z(m);
    for (std::int64_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            z[j] = rng::normal_icdf(gen(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
        }
        out.values.row(i) = (l * z).transpose();
    }
    return out;
}

}  // namespace pshe::limits
