#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "pshe/constants.hpp"
#include "pshe/kernels.hpp"
#include "pshe/paths.hpp"
#include "pshe/polymer.hpp"
#include "pshe/statlab.hpp"

namespace pshe::acceptance {

enum class Profile
{
    desk,
    full
};

Profile parse_profile(const std::string& s);
std::string to_string(Profile p);

//! CSV artifact produced by a check.
struct Artifact
{
    std::string file;
    std::string content;
};

struct CheckResult
{
    int id = 0;
    std::string title;
    std::vector<stat::TestReport> reports;
    std::vector<Artifact> artifacts;
    std::vector<std::string> notes;
    double seconds = 0.0;
    bool budget_exhausted = false;

    bool pass() const { return !reports.empty() && stat::all_pass(reports); }
};

std::string to_json(const std::vector<CheckResult>& results);

//! Shared state: kernel tables, seeds, budgets and cached constants.
class Context
{
  public:
    Context(int d, std::uint64_t seed, int threads, std::ostream* log = nullptr);

    int d() const { return d_; }
    std::uint64_t seed() const { return seed_; }
    int threads() const { return threads_; }
    const kernels::Mollifier& mollifier() const { return m_; }
    const kernels::CovarianceKernel& kernel() const { return v_; }

    //! Soft wall-clock limit (seconds from now, zero disables) and ceiling on simulated paths.
    void set_budget(double wall_seconds, std::int64_t max_paths);
    bool expired() const;
    //! Replica count that fits the path ceiling; records exhaustion when it has to shrink.
    std::int64_t fit_replicas(std::int64_t replicas, std::int64_t paths_per_replica);
    bool exhausted() const { return exhausted_; }
    void mark_exhausted() { exhausted_ = true; }
    void clear_exhausted() { exhausted_ = false; }

    //! C0 in both forms at the given budget, computed once per (beta, budget seed).
    const constants::C0Pair& c0(double beta, const constants::Budget& b);

    std::uint64_t subseed(std::uint64_t a, std::uint64_t b = 0) const;
    void say(const std::string& msg) const;

  private:
    int d_;
    std::uint64_t seed_;
    int threads_;
    std::ostream* log_;
    kernels::Mollifier m_;
    kernels::CovarianceKernel v_;
    std::chrono::steady_clock::time_point deadline_{};
    bool has_deadline_ = false;
    std::int64_t max_paths_ = 0;
    std::int64_t paths_used_ = 0;
    bool exhausted_ = false;
    std::map<std::pair<double, std::uint64_t>, constants::C0Pair> c0_;
};

//! Replica simulation in deadline-checked chunks; stops early when the budget expires.
std::vector<polymer::PolymerSample> simulate(Context& ctx, const polymer::PolymerConfig& cfg,
                                             std::int64_t replicas, double lattice_dx = 0.25);
std::vector<polymer::GramRealization> realize(Context& ctx, const polymer::PolymerConfig& cfg,
                                              std::int64_t replicas);

struct Ensemble
{
    polymer::PolymerConfig cfg;
    std::int64_t replicas = 100;
    double lattice_dx = 0.25;
};

struct FluctuationPlan
{
    polymer::PolymerConfig base;
    double t_base = 1.0;
    double t_max = 16.0;
    std::vector<double> t{1.0};
    std::vector<double> points{0.0, 0.0, 0.0};
    std::int64_t replicas = 100;
};

struct DegeneracyParams
{
    Ensemble gram;
    Ensemble field;
    FluctuationPlan fluctuation;
};

struct MeanOneParams
{
    std::vector<Ensemble> ensembles;
    double k = 5.0;
};

struct EquivalenceParams
{
    Ensemble gram;
    Ensemble field;
};

struct ConstantsParams
{
    double beta = 0.2;
    constants::Budget budget;
    std::int64_t c2_normals = 1'000'000;
};

struct BracketParams
{
    Ensemble ensemble;
    constants::Budget c0_budget;
};

struct GProcessParams
{
    Ensemble ensemble;
    double base_t = 8.0;
    std::vector<double> tau{1.0, 2.0, 4.0};
    std::vector<double> checked_tau{2.0, 4.0};
    double tolerance = 0.15;
    constants::Budget c0_budget;
};

struct CltParams
{
    FluctuationPlan plan;
    constants::Budget c0_budget;
};

struct CovarianceParams
{
    FluctuationPlan plan;
    constants::Budget c0_budget;
};

struct DecorrelationParams
{
    double beta = 0.2;
    std::vector<double> radii{2.0, 3.0, 4.0, 6.0, 8.0};
    paths::FunctionalOptions options;
    double target = -1.0;
    double tolerance = 0.15;
};

struct AveragedParams
{
    FluctuationPlan plan;
    double radius = 1.0;
    double h = 0.25;
    constants::Budget c0_budget;
};

struct StationaryParams
{
    double beta = 0.2;
    std::vector<double> t{1.0, 4.0};
    double r = 1.0;
    double tolerance = 1e-6;
    constants::Budget c0_budget;
};

struct ScalingParams
{
    std::vector<int> dims{3, 4};
    std::vector<double> radii{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
    double tolerance = 1e-3;
};

CheckResult degeneracy(Context& ctx, const DegeneracyParams& p);
CheckResult mean_one(Context& ctx, const MeanOneParams& p);
CheckResult backend_equivalence(Context& ctx, const EquivalenceParams& p);
CheckResult constants_consistency(Context& ctx, const ConstantsParams& p);
CheckResult bracket_decay(Context& ctx, const BracketParams& p);
CheckResult bracket_limit(Context& ctx, const GProcessParams& p);
CheckResult pointwise_clt(Context& ctx, const CltParams& p);
CheckResult spacetime_covariance(Context& ctx, const CovarianceParams& p);
CheckResult decorrelation(Context& ctx, const DecorrelationParams& p);
CheckResult averaged_fluctuations(Context& ctx, const AveragedParams& p);
CheckResult stationarity(Context& ctx, const StationaryParams& p);
CheckResult quadrature_scaling(Context& ctx, const ScalingParams& p);

//! Acceptance criteria 1..12 at the given profile.
struct SuiteParams
{
    DegeneracyParams degeneracy;
    MeanOneParams mean_one;
    EquivalenceParams equivalence;
    ConstantsParams constants;
    BracketParams bracket;
    GProcessParams gprocess;
    CltParams clt;
    CovarianceParams covariance;
    DecorrelationParams decorrelation;
    AveragedParams averaged;
    StationaryParams stationary;
    ScalingParams scaling;
};

SuiteParams suite_params(Profile profile, int d = 3, double beta = 0.2);

CheckResult run_criterion(Context& ctx, const SuiteParams& p, int id);

const std::vector<std::string>& criterion_titles();

}  // namespace pshe::acceptance
