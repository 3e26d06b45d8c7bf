#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace pshe::kernels {

//! Surface area of the unit sphere S^{n-1} in R^n.
double sphere_area(int n);

//! Euclidean norm of a point.
double norm(std::span<const double> x);

//! Smooth radial bump c*exp(-1/(1-4r^2)) on r < 1/2, normalized to unit mass in R^d.
class Mollifier
{
  public:
    static constexpr double support_radius = 0.5;

    Mollifier(int d, int resolution);

    int dimension() const { return d_; }
    double normalization() const { return c_; }
    int resolution() const { return static_cast<int>(table_.size()); }

    //! Profile value at radius r.
    double radial(double r) const
    {
        const double q = 1.0 - 4.0 * r * r;
        return q > 0.0 ? c_ * std::exp(-1.0 / q) : 0.0;
    }

    double operator()(std::span<const double> x) const { return radial(norm(x)); }

    //! phi_eps(r) = eps^{-d} phi(r / eps).
    double scaled(double r, double eps) const { return std::pow(eps, -d_) * radial(r / eps); }

    //! Radial samples at r_k = k / (2 (resolution - 1)).
    const std::vector<double>& table() const { return table_; }
    double table_radius(int k) const { return 0.5 * k / (resolution() - 1); }

  private:
    int d_;
    double c_;
    std::vector<double> table_;
};

Mollifier make_mollifier(int d, int resolution = 256);

//! V = phi * phi as a monotone cubic radial table on [0,1]; exactly zero for r >= 1.
class CovarianceKernel
{
  public:
    static constexpr double support_radius = 1.0;

    CovarianceKernel(int d, std::vector<double> values);

    int dimension() const { return d_; }
    double v0() const { return values_.front(); }
    int resolution() const { return static_cast<int>(values_.size()); }

    double radial(double r) const
    {
        if (r >= 1.0) {
            return 0.0;
        }
        const double u = r * inv_h_;
        const int k = static_cast<int>(u);
        const double t = u - k;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * values_[k] + h01 * values_[k + 1] +
               h_ * (h10 * slopes_[k] + h11 * slopes_[k + 1]);
    }

    //! V evaluated from the squared distance.
    double from_sq(double r2) const { return r2 >= 1.0 ? 0.0 : radial(std::sqrt(r2)); }

    double operator()(std::span<const double> x) const { return radial(norm(x)); }

    const std::vector<double>& values() const { return values_; }
    double table_radius(int k) const { return k * h_; }

  private:
    int d_;
    double h_;
    double inv_h_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

//! V(r) by direct radial convolution quadrature (no table).
double convolve_radial(const Mollifier& m, double r);

CovarianceKernel autocorrelate(const Mollifier& m, int resolution = 1024);

//! Heat kernel (2 pi t)^{-d/2} exp(-|x|^2 / 2t).
double heat_kernel(int d, double t, std::span<const double> x);
double heat_kernel_radial(int d, double t, double r);

//! I(r; c) = int_0^inf rho(2 sigma + c, r) d sigma, by adaptive quadrature plus an exact tail.
double heat_time_integral(int d, double r, double offset = 0.0);

//! Closed form of heat_time_integral via the lower incomplete gamma function.
double heat_time_integral_closed(int d, double r, double offset = 0.0);

//! int_a^b rho(2 v + c, r) dv by adaptive quadrature (finite range).
double heat_time_integral_finite(int d, double r, double offset, double a, double b);

//! Write a radial table as CSV with columns r,value.
void write_radial_csv(std::ostream& os, const std::vector<double>& radii,
                      const std::vector<double>& values);
void write_radial_csv(std::ostream& os, const Mollifier& m);
void write_radial_csv(std::ostream& os, const CovarianceKernel& v);

}  // namespace pshe::kernels
