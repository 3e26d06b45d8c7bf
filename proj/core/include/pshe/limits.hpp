#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pshe::limits {

struct SpaceTimePoint
{
    double t = 0.0;
    std::vector<double> x;
};

enum class Field
{
    H,
    Hbar,
    Hst
};

std::string to_string(Field f);
Field parse_field(const std::string& s);

//! Optional heat smoothing: each point is tested against rho(smoothing, .), which adds
//! 2 * smoothing to every time argument. Zero means pointwise values.
struct Smoothing
{
    double variance = 0.0;
};

//! gamma^2 int_0^inf rho(2 sigma + t + s, y - x) d sigma.
double cov_H(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq,
             Smoothing sm = {});

//! Same integral truncated at sigma = horizon - (t + s) / 2.
double cov_H_horizon(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq,
                     double horizon, Smoothing sm = {});

//! gamma^2 int_{max(t,s)}^{horizon} rho(2u, y - x) du: covariance of nested free-energy
//! increments log Z_horizon - log Z_t and log Z_horizon - log Z_s.
double cov_free_energy(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq,
                       double horizon);

//! amp^2 int_0^{min(t,s)} rho(t + s - 2u, y - x) du. Throws std::domain_error when the integral
//! diverges (coincident points with t = s > 0 and no smoothing).
double cov_Hbar(const SpaceTimePoint& p, const SpaceTimePoint& q, double amp_sq,
                Smoothing sm = {});

//! cov_H + cov_Hbar; amp_sq defaults to gamma_sq.
double cov_Hst(const SpaceTimePoint& p, const SpaceTimePoint& q, double gamma_sq,
               double amp_sq = std::numeric_limits<double>::quiet_NaN(), Smoothing sm = {});

//! GFF closed form gamma^2 Gamma(d/2 - 1) / (pi^{d/2} r^{d-2}).
double gff_closed_form(int d, double r, double gamma_sq);

//! int_0^inf rho(2 sigma, r) d sigma divided by gff_closed_form (gamma^2 = 1).
double gff_prefactor_ratio(int d, double r = 1.0);

struct GaussianLimitSpec
{
    Field field = Field::H;
    int d = 3;
    std::vector<SpaceTimePoint> points;
    Eigen::MatrixXd covariance;
    double gamma_sq = 0.0;
    double gbar_sq = 0.0;
    double amp_sq = 0.0;
    Smoothing smoothing;
};

//! Builds the covariance matrix by quadrature. amp_sq (for Hbar and Hst) defaults to gamma_sq.
GaussianLimitSpec make_limit_spec(Field field, int d, std::vector<SpaceTimePoint> points,
                                  double gamma_sq, double gbar_sq,
                                  double amp_sq = std::numeric_limits<double>::quiet_NaN(),
                                  Smoothing sm = {});

class NotPositiveSemidefinite : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct LimitSamples
{
    Eigen::MatrixXd values;  //!< one row per sample
    double jitter = 0.0;
};

//! n joint centered Gaussian samples by Cholesky; sample i uses its own counter block.
LimitSamples sample_limit(const GaussianLimitSpec& spec, std::int64_t n, std::uint64_t seed);

}  // namespace pshe::limits
