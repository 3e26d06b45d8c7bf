#include "pshe/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

namespace pshe::quad {

Result integrate(const std::function<double(double)>& f, double a, double b, const Tolerance& tol)
{
    if (a == b) {
        return {};
    }
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    // Boost 1.74 compares leaf errors of the unit-interval rule against scaled tolerances, so
    // the integrand is mapped onto [-1, 1] first.
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const auto g = [&](double u) { return half * f(mid + half * u); };
    double error = 0.0;
    double l1 = 0.0;
    // A coarse pass sizes the L1 norm so the absolute tolerance can be expressed relatively.
    GK::integrate(g, -1.0, 1.0, 3, 0.0, &error, &l1);
    const double rel = l1 > 0.0 ? std::max(tol.rel, tol.abs / l1) : 1.0;
    double value = GK::integrate(g, -1.0, 1.0, tol.max_depth, rel, &error, &l1);
    if (b < a) {
        l1 = -l1;
    }
    if (!std::isfinite(value) || error > 10.0 * std::max(tol.abs, rel * l1)) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "quadrature did not converge on [%g, %g]: error %.3g, L1 %.3g", a, b, error,
                      l1);
        throw QuadratureError(msg);
    }
    return {value, error};
}

Result integrate_panels(const std::function<double(double)>& f, const std::vector<double>& points,
                        const Tolerance& tol)
{
    Result total;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const Result r = integrate(f, points[i - 1], points[i], tol);
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

Rule gauss_legendre(int n, double a, double b)
{
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: n must be positive");
    }
    const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
    std::vector<double> x;
    for (double z : zeros) {
        x.push_back(z);
        if (z != 0.0) {
            x.push_back(-z);
        }
    }
    std::sort(x.begin(), x.end());
    Rule rule;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (double z : x) {
        const double dp = boost::math::legendre_p_prime(n, z);
        rule.nodes.push_back(mid + half * z);
        rule.weights.push_back(half * 2.0 / ((1.0 - z * z) * dp * dp));
    }
    return rule;
}

}  // namespace pshe::quad
