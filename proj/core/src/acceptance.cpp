#include "pshe/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pshe/limits.hpp"
#include "pshe/parallel.hpp"
#include "pshe/records.hpp"
#include "pshe/rng.hpp"

namespace pshe::acceptance {

namespace {

using stat::TestReport;

double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> unit_points(int d, int count)
{
    // Origin followed by unit vectors along the first axis: 0, e1, 2 e1, ...
    std::vector<double> p(static_cast<std::size_t>(count) * d, 0.0);
    for (int m = 0; m < count; ++m) {
        p[static_cast<std::size_t>(m) * d] = m;
    }
    return p;
}

std::vector<double> point(const std::vector<double>& pts, int d, int m)
{
    return {pts.begin() + static_cast<std::ptrdiff_t>(m) * d,
            pts.begin() + static_cast<std::ptrdiff_t>(m + 1) * d};
}

//! Exact-zero check for degenerate data.
TestReport exact_zero(std::string name, double max_abs, std::int64_t n)
{
    TestReport r;
    r.name = std::move(name);
    r.statistic = max_abs;
    r.critical = 0.0;
    r.n = n;
    r.rule = "max |value - expected| == 0";
    return r;
}

//! A check whose standard error cannot separate the target from zero has no power.
TestReport resolution(std::string name, double se, double target)
{
    TestReport r;
    r.name = std::move(name);
    r.statistic = target != 0.0 ? se / std::abs(target) : 0.0;
    r.critical = 0.5;
    r.rule = "se / |target| <= 1/2";
    r.with("se", se).with("target", target);
    return r;
}

TestReport failed(std::string name, const std::string& why)
{
    TestReport r;
    r.name = std::move(name);
    r.statistic = std::numeric_limits<double>::infinity();
    r.critical = 0.0;
    r.rule = why;
    return r;
}

double max_abs_dev(const std::vector<double>& x, double c)
{
    double m = 0.0;
    for (double v : x) {
        m = std::max(m, std::abs(v - c));
    }
    return m;
}

//! Unbiased variance with the standard error of the squared deviations.
stat::MeanSe variance_se(const std::vector<double>& x)
{
    const stat::MeanSe m = stat::mean_se(x);
    const double n = static_cast<double>(x.size());
    std::vector<double> sq;
    sq.reserve(x.size());
    for (double v : x) {
        sq.push_back((v - m.mean) * (v - m.mean) * n / (n - 1.0));
    }
    return stat::mean_se(sq);
}

std::size_t horizon_index(const std::vector<double>& h, double t)
{
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (std::abs(h[k] - t) <= 1e-9 * t) {
            return k;
        }
    }
    throw std::invalid_argument("horizon missing from the configuration");
}

double gamma_sq_from_c0(int d, double c0)
{
    return c0 * std::pow(4.0 * std::numbers::pi, 0.5 * d);
}

std::string label(double x)
{
    return records::format(x);
}

struct FluctuationRun
{
    polymer::PolymerConfig cfg;
    std::vector<polymer::GramRealization> gram;
    polymer::FluctuationSet set;
};

FluctuationRun run_fluctuation(Context& ctx, const FluctuationPlan& plan, std::uint64_t seed)
{
    FluctuationRun out;
    out.cfg = polymer::fluctuation_config(plan.base, plan.t_base, plan.t_max, plan.t, plan.points);
    out.cfg.seed = seed;
    std::vector<polymer::PolymerSample> samples;
    if (out.cfg.backend == polymer::Backend::gram) {
        out.gram = realize(ctx, out.cfg, plan.replicas);
        for (const auto& g : out.gram) {
            samples.push_back(g.sample);
        }
    } else {
        samples = simulate(ctx, out.cfg, plan.replicas);
    }
    out.set = polymer::fluctuation_samples(samples, plan.t_base, plan.t_max, plan.t, plan.points);
    return out;
}

//! Replica mean of T^{(d-2)/2} E[(Z_{t1}-Z_{t0})(x_a) (Z_{s1}-Z_{s0})(x_b)] by the path-law
//! estimator; the linearized covariance of the fluctuation samples.
stat::MeanSe moment_route(const std::vector<polymer::GramRealization>& gram, double t_base, int d,
                          int a0, int a1, int b0, int b1, int a, int b)
{
    std::vector<double> v;
    for (const auto& g : gram) {
        v.push_back(std::pow(t_base, 0.5 * (d - 2)) *
                    polymer::integrated_increment_moment(g, a0, a1, b0, b1, a, b));
    }
    return v.size() >= 2 ? stat::mean_se(v) : stat::MeanSe{};
}

}  // namespace

Profile parse_profile(const std::string& s)
{
    if (s == "desk") {
        return Profile::desk;
    }
    if (s == "full") {
        return Profile::full;
    }
    throw std::invalid_argument("unknown profile '" + s + "' (expected desk or full)");
}

std::string to_string(Profile p)
{
    return p == Profile::desk ? "desk" : "full";
}

std::string to_json(const std::vector<CheckResult>& results)
{
    nlohmann::json j;
    bool pass = true;
    j["checks"] = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json c;
        c["id"] = r.id;
        c["title"] = r.title;
        c["pass"] = r.pass();
        c["seconds"] = r.seconds;
        c["budget_exhausted"] = r.budget_exhausted;
        c["notes"] = r.notes;
        c["reports"] = nlohmann::json::parse(stat::to_json(r.reports))["reports"];
        j["checks"].push_back(c);
        pass = pass && r.pass();
    }
    j["pass"] = pass;
    return j.dump(2);
}

Context::Context(int d, std::uint64_t seed, int threads, std::ostream* log)
    : d_(d),
      seed_(seed),
      threads_(std::max(threads, 1)),
      log_(log),
      m_(kernels::make_mollifier(d)),
      v_(kernels::autocorrelate(m_))
{
}

void Context::set_budget(double wall_seconds, std::int64_t max_paths)
{
    has_deadline_ = wall_seconds > 0.0;
    if (has_deadline_) {
        deadline_ = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(wall_seconds));
    }
    max_paths_ = max_paths;
    paths_used_ = 0;
}

bool Context::expired() const
{
    return has_deadline_ && std::chrono::steady_clock::now() >= deadline_;
}

std::int64_t Context::fit_replicas(std::int64_t replicas, std::int64_t paths_per_replica)
{
    if (max_paths_ <= 0 || paths_per_replica <= 0) {
        return replicas;
    }
    const std::int64_t left = std::max<std::int64_t>(0, max_paths_ - paths_used_);
    const std::int64_t fit = std::min(replicas, left / paths_per_replica);
    if (fit < replicas) {
        exhausted_ = true;
    }
    paths_used_ += fit * paths_per_replica;
    return fit;
}

const constants::C0Pair& Context::c0(double beta, const constants::Budget& b)
{
    const auto key = std::make_pair(beta, b.seed);
    auto it = c0_.find(key);
    if (it == c0_.end()) {
        say("estimating C0 at beta " + label(beta));
        constants::Budget nb = b;
        nb.threads = threads_;
        it = c0_.emplace(key, constants::c0_two_forms(beta, v_, nb)).first;
    }
    return it->second;
}

std::uint64_t Context::subseed(std::uint64_t a, std::uint64_t b) const
{
    return rng::derive_key(seed_, a, b);
}

void Context::say(const std::string& msg) const
{
    if (log_) {
        *log_ << "  " << msg << '\n' << std::flush;
    }
}

std::vector<polymer::PolymerSample> simulate(Context& ctx, const polymer::PolymerConfig& cfg,
                                             std::int64_t replicas, double lattice_dx)
{
    const std::int64_t n = ctx.fit_replicas(replicas, cfg.n_paths());
    const std::int64_t chunk = std::max<std::int64_t>(8, 4 * ctx.threads());
    std::vector<polymer::PolymerSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t first = 0; first < n; first += chunk) {
        if (ctx.expired()) {
            ctx.mark_exhausted();
            break;
        }
        polymer::ReplicaOptions opt;
        opt.replicas = std::min(chunk, n - first);
        opt.threads = ctx.threads();
        opt.first = first;
        opt.lattice_dx = lattice_dx;
        auto part = polymer::simulate(cfg, ctx.mollifier(), ctx.kernel(), opt);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::vector<polymer::GramRealization> realize(Context& ctx, const polymer::PolymerConfig& cfg,
                                              std::int64_t replicas)
{
    const std::int64_t n = ctx.fit_replicas(replicas, cfg.n_paths());
    const std::int64_t chunk = std::max<std::int64_t>(8, 4 * ctx.threads());
    std::vector<polymer::GramRealization> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t first = 0; first < n; first += chunk) {
        if (ctx.expired()) {
            ctx.mark_exhausted();
            break;
        }
        auto part = run_indexed(std::min(chunk, n - first), ctx.threads(), [&](std::int64_t r) {
            return polymer::realize_gram(cfg, ctx.kernel(), first + r);
        });
        for (auto& g : part) {
            out.push_back(std::move(g));
        }
    }
    return out;
}

CheckResult degeneracy(Context& ctx, const DegeneracyParams& p)
{
    CheckResult out;
    std::vector<polymer::PolymerSample> all;
    for (const Ensemble* e : {&p.gram, &p.field}) {
        polymer::PolymerConfig cfg = e->cfg;
        cfg.beta = 0.0;
        cfg.seed = ctx.subseed(1, static_cast<std::uint64_t>(cfg.backend));
        const auto samples = simulate(ctx, cfg, e->replicas, e->lattice_dx);
        double dz = 0.0;
        double dlog = 0.0;
        std::int64_t n = 0;
        for (const auto& s : samples) {
            for (std::size_t k = 0; k < s.horizons.size(); ++k) {
                for (int m = 0; m < s.n_starts(); ++m) {
                    dz = std::max(dz, std::abs(s.at(k, m) - 1.0));
                    dlog = std::max(dlog, std::abs(s.log_at(k, m)));
                    ++n;
                }
            }
        }
        const std::string b = polymer::to_string(cfg.backend);
        out.reports.push_back(exact_zero(b + ": Z == 1", dz, n));
        out.reports.push_back(exact_zero(b + ": log Z == 0", dlog, n));

        FluctuationPlan plan = p.fluctuation;
        plan.base.beta = 0.0;
        plan.base.backend = cfg.backend;
        const auto run = run_fluctuation(ctx, plan, ctx.subseed(1, 10 + static_cast<int>(cfg.backend)));
        out.reports.push_back(exact_zero(b + ": fluctuation samples == 0",
                                         max_abs_dev(run.set.values, 0.0),
                                         static_cast<std::int64_t>(run.set.values.size())));
        all.insert(all.end(), samples.begin(), samples.end());
    }
    constants::Budget b;
    b.nodes = 8;
    b.samples_per_node = 16;
    const auto g = constants::gamma_sq(0.0, ctx.kernel(), b);
    out.reports.push_back(exact_zero("gamma^2(beta=0) == 0", std::abs(g.value), b.nodes));
    out.artifacts.push_back({"degeneracy_samples.csv", records::samples_csv(all)});
    return out;
}

CheckResult mean_one(Context& ctx, const MeanOneParams& p)
{
    CheckResult out;
    std::vector<polymer::PolymerSample> all;
    for (std::size_t e = 0; e < p.ensembles.size(); ++e) {
        polymer::PolymerConfig cfg = p.ensembles[e].cfg;
        cfg.seed = ctx.subseed(2, e);
        ctx.say("mean-one: " + polymer::to_string(cfg.backend) + " backend");
        const auto samples = simulate(ctx, cfg, p.ensembles[e].replicas, p.ensembles[e].lattice_dx);
        if (samples.size() < 2) {
            out.reports.push_back(failed("mean-one " + polymer::to_string(cfg.backend),
                                         "too few replicas within the budget"));
            continue;
        }
        for (std::size_t k = 0; k < cfg.horizons.size(); ++k) {
            std::vector<double> z;
            for (const auto& s : samples) {
                z.push_back(s.at(k, 0));
            }
            const auto m = stat::mean_se(z);
            auto r = stat::within_se(polymer::to_string(cfg.backend) + ": mean Z at T=" +
                                         label(cfg.horizons[k]),
                                     m.mean, m.se, 1.0, p.k);
            r.n = m.n;
            r.seed = cfg.seed;
            out.reports.push_back(r);
        }
        all.insert(all.end(), samples.begin(), samples.end());
    }
    out.artifacts.push_back({"mean_one_samples.csv", records::samples_csv(all)});
    return out;
}

CheckResult backend_equivalence(Context& ctx, const EquivalenceParams& p)
{
    CheckResult out;
    std::vector<std::vector<double>> logs;
    std::vector<polymer::PolymerSample> all;
    for (const Ensemble* e : {&p.gram, &p.field}) {
        polymer::PolymerConfig cfg = e->cfg;
        cfg.seed = ctx.subseed(3, static_cast<std::uint64_t>(cfg.backend));
        ctx.say("equivalence: " + polymer::to_string(cfg.backend) + " backend, " +
                std::to_string(e->replicas) + " replicas");
        const auto samples = simulate(ctx, cfg, e->replicas, e->lattice_dx);
        std::vector<double> l;
        for (const auto& s : samples) {
            l.push_back(s.log_at(0, 0));
        }
        logs.push_back(l);
        all.insert(all.end(), samples.begin(), samples.end());
    }
    if (logs[0].empty() || logs[1].empty()) {
        out.reports.push_back(failed("ks two-sample gram vs field", "no replicas within budget"));
        return out;
    }
    auto r = stat::ks_two_sample(logs[0], logs[1], "ks two-sample log Z gram vs field",
                                 ctx.subseed(3));
    for (int b = 0; b < 2; ++b) {
        const auto m = stat::mean_se(logs[b]);
        const std::string tag = b == 0 ? "gram" : "field";
        r.with(tag + "_mean_logZ", m.mean).with(tag + "_se_logZ", m.se);
    }
    out.reports.push_back(r);
    out.artifacts.push_back({"equivalence_samples.csv", records::samples_csv(all)});
    return out;
}

CheckResult constants_consistency(Context& ctx, const ConstantsParams& p)
{
    CheckResult out;
    constants::Budget b = p.budget;
    b.threads = ctx.threads();
    ctx.say("constants: building the table");
    const auto table = constants::build_table(p.beta, ctx.kernel(), b, p.c2_normals);
    const double se = std::hypot(table.c0_a.se, table.c0_b.se);
    auto r = stat::within_se("C0 form A vs form B", table.c0_a.value - table.c0_b.value, se, 0.0,
                             2.0);
    r.with("c0_a", table.c0_a.value).with("c0_b", table.c0_b.value);
    r.n = table.c0_a.samples + table.c0_b.samples;
    r.seed = b.seed;
    out.reports.push_back(r);
    out.reports.push_back(stat::within_absolute("gamma^2 == beta^2 gbar^2", table.gamma_sq.value,
                                                p.beta * p.beta * table.gbar_sq.value, 0.0));
    for (int d : {3, 4}) {
        const auto mc = constants::c2_monte_carlo(d, p.c2_normals, ctx.subseed(4, d));
        const double exact = d == 3 ? 2.0 / std::sqrt(std::numbers::pi) : 1.0;
        auto c = stat::within_se("C2(" + std::to_string(d) + ") Monte Carlo", mc.value, mc.se,
                                 exact, 3.0);
        c.n = mc.samples;
        out.reports.push_back(c);
    }
    if (table.flagged_nodes > 0) {
        out.notes.push_back(std::to_string(table.flagged_nodes) +
                            " quadrature nodes flagged by the truncation diagnostic");
    }
    out.artifacts.push_back({"constants.csv", records::constants_csv(table)});
    out.artifacts.push_back({"constants.json", records::constants_json(table)});
    return out;
}

CheckResult bracket_decay(Context& ctx, const BracketParams& p)
{
    CheckResult out;
    polymer::PolymerConfig cfg = p.ensemble.cfg;
    cfg.seed = ctx.subseed(5);
    const double c0 = ctx.c0(cfg.beta, p.c0_budget).a.value;
    ctx.say("bracket: " + std::to_string(p.ensemble.replicas) + " gram replicas");
    const auto gram = realize(ctx, cfg, p.ensemble.replicas);
    if (gram.size() < 2) {
        out.reports.push_back(failed("bracket decay", "too few replicas within the budget"));
        return out;
    }
    std::vector<double> mean, mean_se, sq, sq_se;
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < cfg.horizons.size(); ++k) {
        std::vector<double> a, b;
        for (const auto& g : gram) {
            const auto m = polymer::integrated_bracket_moments(g, ctx.kernel(), k, 0, c0);
            a.push_back(m.mean);
            b.push_back(m.mean_square);
        }
        const auto ma = stat::mean_se(a);
        const auto mb = stat::mean_se(b);
        mean.push_back(ma.mean);
        mean_se.push_back(ma.se);
        sq.push_back(mb.mean);
        sq_se.push_back(mb.se);
        rows.push_back({cfg.horizons[k], ma.mean, ma.se, mb.mean, mb.se});
    }
    auto r1 = stat::trend_to_zero(mean, mean_se, "E[L_T] trend to zero");
    auto r2 = stat::trend_to_zero(sq, sq_se, "E[L_T^2] trend to zero");
    r1.n = r2.n = static_cast<std::int64_t>(gram.size());
    r1.seed = r2.seed = cfg.seed;
    r1.with("c0", c0);
    out.reports.push_back(r1);
    out.reports.push_back(r2);
    out.artifacts.push_back(
        {"bracket.csv",
         records::table_csv({"T", "mean_L", "se_mean_L", "mean_L2", "se_mean_L2"}, rows)});
    return out;
}

CheckResult bracket_limit(Context& ctx, const GProcessParams& p)
{
    CheckResult out;
    polymer::PolymerConfig cfg = polymer::g_process_config(p.ensemble.cfg, p.base_t, p.tau);
    cfg.seed = ctx.subseed(6);
    const int d = cfg.d;
    const double c0 = ctx.c0(cfg.beta, p.c0_budget).a.value;
    ctx.say("G process: " + std::to_string(p.ensemble.replicas) + " gram replicas to T=" +
            label(cfg.horizons.back()));
    const auto gram = realize(ctx, cfg, p.ensemble.replicas);
    if (gram.size() < 30) {
        out.reports.push_back(failed("G process", "too few replicas within the budget"));
        return out;
    }
    std::vector<polymer::PolymerSample> samples;
    for (const auto& g : gram) {
        samples.push_back(g.sample);
    }
    const auto gp = polymer::g_process(samples, p.base_t, p.tau, c0);
    const std::size_t nt = p.tau.size();
    for (double tau : p.checked_tau) {
        const std::size_t j = horizon_index(p.tau, tau);
        std::vector<double> col;
        for (std::int64_t r = 0; r < gp.replicas; ++r) {
            col.push_back(gp.values[static_cast<std::size_t>(r) * nt + j]);
        }
        const double target = polymer::g_target(d, c0, tau);
        const auto ci = stat::variance_ci(col, 0.99, cfg.seed);
        auto r = stat::within_relative("Var G_tau vs g(tau) at tau=" + label(tau), ci.estimate,
                                       target, p.tolerance);
        const auto mr = moment_route(gram, p.base_t, d, 0, static_cast<int>(j), 0,
                                     static_cast<int>(j), 0, 0);
        r.with("ci_lower", ci.lower)
            .with("ci_upper", ci.upper)
            .with("moment_route", mr.mean)
            .with("moment_route_se", mr.se);
        r.n = gp.replicas;
        r.seed = cfg.seed;
        out.reports.push_back(r);
    }
    out.notes.push_back("moment_route: replica mean of the path-law estimator of T^{(d-2)/2} "
                        "E[(Z_{tau T} - Z_T)^2]");
    out.artifacts.push_back({"gprocess.csv", records::gprocess_csv(gp)});
    return out;
}

CheckResult pointwise_clt(Context& ctx, const CltParams& p)
{
    CheckResult out;
    const int d = p.plan.base.d;
    const double c0 = ctx.c0(p.plan.base.beta, p.c0_budget).a.value;
    ctx.say("CLT: fluctuation samples to T_max=" + label(p.plan.t_max));
    const auto run = run_fluctuation(ctx, p.plan, ctx.subseed(7));
    const auto x = run.set.column(0, 0);
    const double t = p.plan.t.front();
    const double target = 2.0 / (d - 2) * c0 * std::pow(t, -0.5 * (d - 2));
    if (x.size() < 100) {
        out.reports.push_back(failed("ks_normal", "fewer than 100 replicas within the budget"));
        return out;
    }
    if (target == 0.0) {
        out.reports.push_back(exact_zero("degenerate fluctuation samples", max_abs_dev(x, 0.0),
                                         static_cast<std::int64_t>(x.size())));
        return out;
    }
    out.reports.push_back(stat::ks_normal(x, 0.0, target, "ks_normal vs N(0, 2 C0/(d-2))",
                                          run.cfg.seed));
    const auto ci = stat::variance_ci(x, 0.99, run.cfg.seed);
    TestReport r;
    r.name = "variance CI contains 2 C0/(d-2)";
    r.statistic = target;
    r.lower = ci.lower;
    r.critical = ci.upper;
    r.n = ci.n;
    r.seed = run.cfg.seed;
    r.rule = "ci_lower <= target <= ci_upper";
    const std::size_t kt = horizon_index(run.cfg.horizons, t * p.plan.t_base);
    const std::size_t km = run.cfg.horizons.size() - 1;
    const auto mr = moment_route(run.gram, p.plan.t_base, d, static_cast<int>(kt),
                                 static_cast<int>(km), static_cast<int>(kt), static_cast<int>(km),
                                 0, 0);
    r.with("variance", ci.estimate).with("moment_route", mr.mean).with("moment_route_se", mr.se);
    out.reports.push_back(r);
    out.artifacts.push_back({"clt_fluctuation.csv", records::fluctuation_csv(run.set)});
    return out;
}

CheckResult spacetime_covariance(Context& ctx, const CovarianceParams& p)
{
    CheckResult out;
    const int d = p.plan.base.d;
    const double gsq = gamma_sq_from_c0(d, ctx.c0(p.plan.base.beta, p.c0_budget).a.value);
    ctx.say("space-time covariance: fluctuation samples to T_max=" + label(p.plan.t_max));
    const auto run = run_fluctuation(ctx, p.plan, ctx.subseed(8));
    const auto& set = run.set;
    if (set.replicas < 3) {
        out.reports.push_back(failed("space-time covariance", "too few replicas within budget"));
        return out;
    }
    struct Node
    {
        std::size_t i;
        int m;
    };
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < set.t.size(); ++i) {
        for (int m = 0; m < set.n_points(); ++m) {
            // The checked set: every point at the first time, and the origin at later times.
            if (i == 0 || m == 0) {
                nodes.push_back({i, m});
            }
        }
    }
    const double horizon = p.plan.t_max / p.plan.t_base;
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        for (std::size_t w = u + 1; w < nodes.size(); ++w) {
            const limits::SpaceTimePoint a{set.t[nodes[u].i], point(set.points, d, nodes[u].m)};
            const limits::SpaceTimePoint b{set.t[nodes[w].i], point(set.points, d, nodes[w].m)};
            const auto cov = stat::covariance(set.column(nodes[u].i, nodes[u].m),
                                              set.column(nodes[w].i, nodes[w].m));
            const double target = limits::cov_H(a, b, gsq);
            const std::string tag = "(t=" + label(a.t) + ",x" + std::to_string(nodes[u].m) +
                                    ")-(t=" + label(b.t) + ",x" + std::to_string(nodes[w].m) + ")";
            auto r = stat::within_se("cov " + tag + " vs cov_H", cov.mean, cov.se, target, 3.0);
            const std::size_t ka = horizon_index(run.cfg.horizons, a.t * p.plan.t_base);
            const std::size_t kb = horizon_index(run.cfg.horizons, b.t * p.plan.t_base);
            const int km = static_cast<int>(run.cfg.horizons.size()) - 1;
            const auto mr = moment_route(run.gram, p.plan.t_base, d, static_cast<int>(ka), km,
                                         static_cast<int>(kb), km, nodes[u].m, nodes[w].m);
            r.with("nested_target", limits::cov_free_energy(a, b, gsq, horizon))
                .with("moment_route", mr.mean)
                .with("moment_route_se", mr.se);
            r.n = set.replicas;
            r.seed = run.cfg.seed;
            out.reports.push_back(r);
            if (target != 0.0) {
                out.reports.push_back(resolution("resolution " + tag, cov.se, target));
            }
        }
    }
    out.notes.push_back("nested_target: covariance of the nested increments log Z_{T_max} - "
                        "log Z_{tT}, gamma^2 int_{max(t,s)}^{T_max/T} rho(2u, x - y) du");
    out.artifacts.push_back({"covariance_fluctuation.csv", records::fluctuation_csv(set)});
    return out;
}

CheckResult decorrelation(Context& ctx, const DecorrelationParams& p)
{
    CheckResult out;
    const int d = ctx.d();
    std::vector<double> cov, se;
    std::vector<std::vector<double>> rows;
    int flagged = 0;
    for (std::size_t i = 0; i < p.radii.size(); ++i) {
        std::vector<double> y(d, 0.0);
        y[0] = p.radii[i] / std::numbers::sqrt2;
        paths::FunctionalOptions o = p.options;
        o.seed = ctx.subseed(9, i);
        ctx.say("decorrelation: |x| = " + label(p.radii[i]));
        const auto e = paths::exp_functional(y, p.beta, ctx.kernel(), o);
        cov.push_back(e.value - 1.0);
        se.push_back(e.se);
        flagged += e.flagged ? 1 : 0;
        rows.push_back({p.radii[i], e.value - 1.0, e.se, e.truncation_diff, e.truncation_se,
                        e.flagged ? 1.0 : 0.0});
    }
    out.artifacts.push_back(
        {"covariance_decay.csv",
         records::table_csv({"r", "cov", "se", "truncation_diff", "truncation_se", "flagged"},
                            rows)});
    if (p.beta == 0.0) {
        out.reports.push_back(exact_zero("degenerate covariance", max_abs_dev(cov, 0.0),
                                         static_cast<std::int64_t>(cov.size())));
        return out;
    }
    if (std::any_of(cov.begin(), cov.end(), [](double c) { return !(c > 0.0); })) {
        out.reports.push_back(failed("log-log slope", "nonpositive covariance estimate"));
        return out;
    }
    const auto fit = stat::loglog_slope(p.radii, cov);
    TestReport r;
    r.name = "log-log slope of Cov(Z(0), Z(x))";
    r.statistic = std::abs(fit.slope - p.target);
    r.critical = p.tolerance;
    r.n = fit.n;
    r.seed = ctx.subseed(9);
    r.rule = "|slope - target| <= tolerance";
    r.with("slope", fit.slope).with("ci_lower", fit.lower).with("ci_upper", fit.upper);
    r.with("target", p.target);
    out.reports.push_back(r);
    if (flagged > 0) {
        out.notes.push_back(std::to_string(flagged) + " radii flagged by the truncation diagnostic");
    }
    return out;
}

CheckResult averaged_fluctuations(Context& ctx, const AveragedParams& p)
{
    CheckResult out;
    const int d = p.plan.base.d;
    const double gsq = gamma_sq_from_c0(d, ctx.c0(p.plan.base.beta, p.c0_budget).a.value);
    const auto grid = polymer::bump_grid(d, p.radius, p.h);
    FluctuationPlan plan = p.plan;
    plan.points = grid.points;
    ctx.say("averaged: " + std::to_string(grid.weights.size()) + " grid points");
    const auto run = run_fluctuation(ctx, plan, ctx.subseed(10));
    const auto x = polymer::averaged_fluctuation(run.set, 0, grid.weights);

    // Double sum of cov_H over the grid; distances repeat, so cache by squared index distance.
    const double t = plan.t.front();
    const std::size_t n = grid.weights.size();
    std::map<long long, double> cache;
    double target = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            long long k2 = 0;
            for (int c = 0; c < d; ++c) {
                const auto u = std::llround((grid.points[a * d + c] - grid.points[b * d + c]) / p.h);
                k2 += u * u;
            }
            auto it = cache.find(k2);
            if (it == cache.end()) {
                std::vector<double> y(d, 0.0);
                y[0] = p.h * std::sqrt(static_cast<double>(k2));
                const double c = limits::cov_H({t, std::vector<double>(d, 0.0)}, {t, y}, gsq);
                it = cache.emplace(k2, c).first;
            }
            target += grid.weights[a] * grid.weights[b] * it->second;
        }
    }
    if (x.size() < 3) {
        out.reports.push_back(failed("averaged variance", "too few replicas within budget"));
        return out;
    }
    const auto v = variance_se(x);
    if (target == 0.0) {
        out.reports.push_back(exact_zero("degenerate averaged samples", max_abs_dev(x, 0.0), v.n));
        return out;
    }
    auto r = stat::within_se("variance of phi-averaged fluctuation vs cov_H double sum", v.mean,
                             v.se, target, 3.0);
    r.n = v.n;
    r.seed = run.cfg.seed;
    r.with("grid_points", static_cast<double>(n));
    out.reports.push_back(r);
    out.reports.push_back(resolution("resolution averaged variance", v.se, target));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < x.size(); ++i) {
        rows.push_back({static_cast<double>(i), x[i]});
    }
    out.artifacts.push_back({"averaged.csv", records::table_csv({"replica", "value"}, rows)});
    return out;
}

CheckResult stationarity(Context& ctx, const StationaryParams& p)
{
    CheckResult out;
    const int d = ctx.d();
    const double gsq = gamma_sq_from_c0(d, ctx.c0(p.beta, p.c0_budget).a.value);
    std::vector<double> y(d, 0.0);
    y[0] = p.r;
    const std::vector<double> x0(d, 0.0);
    const double base = limits::cov_Hst({0.0, x0}, {0.0, y}, gsq);
    std::vector<std::vector<double>> rows;
    for (double t : p.t) {
        const double v = limits::cov_Hst({t, x0}, {t, y}, gsq);
        auto r = stat::within_absolute("cov_Hst equal-time marginal at t=" + label(t) +
                                           " with amp = gamma",
                                       v, base, p.tolerance);
        out.reports.push_back(r);
        double alt = std::numeric_limits<double>::quiet_NaN();
        if (p.beta > 0.0) {
            alt = limits::cov_Hst({t, x0}, {t, y}, gsq, gsq / (p.beta * p.beta));
            auto diag = stat::within_absolute("amp^2 = gbar^2 discrepancy at t=" + label(t), alt,
                                              base, p.tolerance);
            diag.informational = true;
            out.reports.push_back(diag);
        }
        rows.push_back({t, v, base, alt});
    }
    out.artifacts.push_back(
        {"stationarity.csv",
         records::table_csv({"t", "cov_Hst_gamma", "cov_Hst_t0", "cov_Hst_gbar"}, rows)});
    return out;
}

CheckResult quadrature_scaling(Context& /*ctx*/, const ScalingParams& p)
{
    CheckResult out;
    std::vector<std::vector<double>> rows;
    for (int d : p.dims) {
        std::vector<double> v;
        for (double r : p.radii) {
            v.push_back(kernels::heat_time_integral(d, r));
            rows.push_back({static_cast<double>(d), r, v.back()});
        }
        const auto fit = stat::loglog_slope(p.radii, v);
        TestReport r;
        r.name = "slope of int rho(2 sigma, x) d sigma, d=" + std::to_string(d);
        r.statistic = std::abs(fit.slope + (d - 2));
        r.critical = p.tolerance;
        r.n = fit.n;
        r.rule = "|slope + (d - 2)| <= tolerance";
        r.with("slope", fit.slope);
        out.reports.push_back(r);
        TestReport ratio;
        ratio.name = "prefactor ratio to the GFF closed form, d=" + std::to_string(d);
        ratio.statistic = limits::gff_prefactor_ratio(d);
        ratio.critical = ratio.statistic;
        ratio.informational = true;
        ratio.rule = "reported only";
        out.reports.push_back(ratio);
    }
    out.artifacts.push_back(
        {"quadrature_scaling.csv", records::table_csv({"d", "r", "integral"}, rows)});
    return out;
}

const std::vector<std::string>& criterion_titles()
{
    static const std::vector<std::string> t{
        "degeneracy at beta = 0",
        "martingale mean one",
        "backend equivalence",
        "constants consistency",
        "bracket decay",
        "martingale bracket limit",
        "pointwise CLT",
        "space-time covariance",
        "decorrelation law",
        "averaged fluctuations",
        "stationarity bookkeeping",
        "quadrature scaling",
    };
    return t;
}

SuiteParams suite_params(Profile profile, int d, double beta)
{
    const bool full = profile == Profile::full;
    SuiteParams s;
    auto config = [&](int paths, std::vector<double> horizons, polymer::Backend b,
                      std::vector<double> starts, double dt = 1e-3) {
        polymer::PolymerConfig c;
        c.d = d;
        c.beta = beta;
        c.dt = dt;
        c.paths_per_start = paths;
        c.horizons = std::move(horizons);
        c.backend = b;
        c.starts = std::move(starts);
        return c;
    };
    const auto origin = unit_points(d, 1);
    const auto two = unit_points(d, 2);
    using polymer::Backend;

    constants::Budget c0b;
    c0b.nodes = 32;
    c0b.samples_per_node = full ? 20000 : 2000;
    c0b.c1_samples = full ? 200000 : 20000;
    c0b.seed = rng::derive_key(0x43300ull, 1);

    s.degeneracy.gram = {config(8, {1.0, 2.0}, Backend::gram, two), 10};
    s.degeneracy.field = {config(8, {1.0, 2.0}, Backend::field, two), 10};
    s.degeneracy.fluctuation.base = config(4, {1.0}, Backend::gram, origin);
    s.degeneracy.fluctuation.replicas = 5;

    s.mean_one.ensembles = {
        {config(full ? 256 : 64, {1.0, 2.0, 4.0, 8.0}, Backend::gram, origin), full ? 2000 : 300},
        {config(full ? 64 : 16, {0.5, 1.0}, Backend::field, origin), full ? 2000 : 300},
    };

    s.equivalence.gram = {config(16, {1.0}, Backend::gram, origin), 2000};
    s.equivalence.field = {config(16, {1.0}, Backend::field, origin), 2000};

    s.constants.beta = beta;
    s.constants.budget = c0b;
    s.constants.c2_normals = full ? 10'000'000 : 3'000'000;

    s.bracket.ensemble = {config(full ? 256 : 64, {2.0, 4.0, 8.0, 16.0}, Backend::gram, origin),
                          full ? 1000 : 100};
    s.bracket.c0_budget = c0b;

    s.gprocess.ensemble = {config(full ? 256 : 64, {1.0}, Backend::gram, origin),
                           full ? 1000 : 200};
    s.gprocess.c0_budget = c0b;

    s.clt.plan.base = config(full ? 64 : 16, {1.0}, Backend::gram, origin, full ? 1e-3 : 1e-2);
    s.clt.plan.t_base = 8.0;
    s.clt.plan.t_max = 128.0;
    s.clt.plan.t = {1.0};
    s.clt.plan.points = origin;
    s.clt.plan.replicas = full ? 1000 : 100;
    s.clt.c0_budget = c0b;

    s.covariance.plan.base = config(full ? 64 : 32, {1.0}, Backend::gram, two);
    s.covariance.plan.t_base = full ? 8.0 : 1.0;
    s.covariance.plan.t_max = 16.0 * s.covariance.plan.t_base;
    s.covariance.plan.t = {1.0, 2.0};
    s.covariance.plan.points = two;
    s.covariance.plan.replicas = full ? 1000 : 200;
    s.covariance.c0_budget = c0b;

    s.decorrelation.beta = beta;
    s.decorrelation.options.s_max = 16384.0;
    s.decorrelation.options.n_samples = full ? 200000 : 20000;
    s.decorrelation.target = -(d - 2.0);

    s.averaged.plan.base = config(1, {1.0}, Backend::gram, origin, full ? 1e-3 : 4e-3);
    s.averaged.plan.t_base = 1.0;
    s.averaged.plan.t_max = 16.0;
    s.averaged.plan.t = {1.0};
    s.averaged.plan.replicas = full ? 1000 : 200;
    s.averaged.c0_budget = c0b;

    s.stationary.beta = beta;
    s.stationary.c0_budget = c0b;
    return s;
}

CheckResult run_criterion(Context& ctx, const SuiteParams& p, int id)
{
    const auto t0 = std::chrono::steady_clock::now();
    ctx.clear_exhausted();
    CheckResult r;
    switch (id) {
    case 1:
        r = degeneracy(ctx, p.degeneracy);
        break;
    case 2:
        r = mean_one(ctx, p.mean_one);
        break;
    case 3:
        r = backend_equivalence(ctx, p.equivalence);
        break;
    case 4:
        r = constants_consistency(ctx, p.constants);
        break;
    case 5:
        r = bracket_decay(ctx, p.bracket);
        break;
    case 6:
        r = bracket_limit(ctx, p.gprocess);
        break;
    case 7:
        r = pointwise_clt(ctx, p.clt);
        break;
    case 8:
        r = spacetime_covariance(ctx, p.covariance);
        break;
    case 9:
        r = decorrelation(ctx, p.decorrelation);
        break;
    case 10:
        r = averaged_fluctuations(ctx, p.averaged);
        break;
    case 11:
        r = stationarity(ctx, p.stationary);
        break;
    case 12:
        r = quadrature_scaling(ctx, p.scaling);
        break;
    default:
        throw std::invalid_argument("criterion id must lie in 1..12");
    }
    r.id = id;
    r.title = criterion_titles()[static_cast<std::size_t>(id - 1)];
    r.seconds = elapsed(t0);
    r.budget_exhausted = ctx.exhausted();
    return r;
}

}  // namespace pshe::acceptance
