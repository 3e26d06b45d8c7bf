#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace pshe::quad {

class QuadratureError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct Tolerance
{
    double abs = 1e-8;
    double rel = 1e-10;
    unsigned max_depth = 24;
};

struct Result
{
    double value = 0.0;
    double error = 0.0;
};

//! Adaptive Gauss-Kronrod (7/15) integral of f over [a,b].
//! Throws QuadratureError when neither tolerance is met at max depth.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Tolerance& tol = {});

//! Adaptive integral over consecutive panels [p0,p1], [p1,p2], ...
Result integrate_panels(const std::function<double(double)>& f, const std::vector<double>& points,
                        const Tolerance& tol = {});

struct Rule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

//! Gauss-Legendre rule with n nodes mapped to [a,b].
Rule gauss_legendre(int n, double a, double b);

}  // namespace pshe::quad
