#pragma once

#include <cmath>
#include <functional>

namespace oracle {

//! Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    }
    return s * h / 3.0;
}

inline double bump(double r)
{
    const double q = 1.0 - 4.0 * r * r;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

//! Unit-mass mollifier profile in d = 3.
inline double mollifier3(double r)
{
    static const double mass =
        simpson([](double s) { return 4.0 * M_PI * s * s * bump(s); }, 0.0, 0.5);
    return bump(r) / mass;
}

}  // namespace oracle
