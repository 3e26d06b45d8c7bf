#include "pshe/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "pshe/limits.hpp"
#include "pshe/records.hpp"

namespace pshe::experiment {

namespace {

namespace fs = std::filesystem;
using acceptance::CheckResult;

constants::Budget constants_budget(const cli::ExperimentConfig& cfg)
{
    constants::Budget b;
    b.nodes = cfg.nodes;
    b.samples_per_node = cfg.samples_per_node;
    b.c1_samples = cfg.c1_samples;
    b.s_max = cfg.s_max;
    b.dt = cfg.dt;
    b.seed = cfg.seed;
    b.threads = cfg.threads;
    return b;
}

acceptance::FluctuationPlan plan(const cli::ExperimentConfig& cfg)
{
    acceptance::FluctuationPlan p;
    p.base = cfg.polymer();
    p.t_base = cfg.t_base;
    p.t_max = cfg.t_max;
    p.t = cfg.t_points;
    p.points = cfg.points;
    p.replicas = cfg.replicas;
    return p;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw cli::ConfigError("cannot read '" + path + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

//! Inline JSON when the value starts with a brace, otherwise a path to a JSON file.
limits::GaussianLimitSpec load_limit_spec(const std::string& value)
{
    const auto first = value.find_first_not_of(" \t\r\n");
    const std::string text =
        first != std::string::npos && value[first] == '{' ? value : read_file(value);
    try {
        return records::parse_limit_spec(text);
    } catch (const std::invalid_argument& e) {
        throw cli::ConfigError(e.what());
    }
}

CheckResult limit_sample(acceptance::Context& ctx, const cli::ExperimentConfig& cfg,
                         const limits::GaussianLimitSpec& spec)
{
    CheckResult out;
    const auto s = limits::sample_limit(spec, cfg.limit_samples, ctx.subseed(0x4c53));
    const Eigen::Index n = s.values.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            std::vector<double> a(s.values.rows());
            std::vector<double> b(s.values.rows());
            for (Eigen::Index r = 0; r < s.values.rows(); ++r) {
                a[r] = s.values(r, i);
                b[r] = s.values(r, j);
            }
            const auto c = stat::covariance(a, b);
            auto rep = stat::within_se("sample covariance (" + std::to_string(i) + "," +
                                           std::to_string(j) + ")",
                                       c.mean, c.se, spec.covariance(i, j), 4.0);
            rep.n = c.n;
            out.reports.push_back(rep);
        }
    }
    out.artifacts.push_back({"limit_samples.csv", records::limit_samples_csv(s)});
    out.artifacts.push_back({"limit_spec.json", records::limit_spec_json(spec)});
    if (s.jitter > 0.0) {
        out.notes.push_back("Cholesky jitter " + records::format(s.jitter));
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

}  // namespace

std::vector<CheckResult> checks(acceptance::Context& ctx, const cli::ExperimentConfig& cfg)
{
    std::vector<CheckResult> out;
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](CheckResult r, int id, std::string title) {
        r.id = id;
        r.title = std::move(title);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.budget_exhausted = ctx.exhausted();
        out.push_back(std::move(r));
    };
    const auto& sc = cfg.subcommand;
    if (sc == "constants") {
        acceptance::ConstantsParams p{cfg.beta, constants_budget(cfg), cfg.c2_normals};
        finish(acceptance::constants_consistency(ctx, p), 4, "constants");
    } else if (sc == "simulate-z") {
        acceptance::MeanOneParams p;
        p.ensembles.push_back({cfg.polymer(), cfg.replicas, cfg.lattice_dx});
        finish(acceptance::mean_one(ctx, p), 2, "simulate-z");
    } else if (sc == "fluctuation") {
        acceptance::CovarianceParams p{plan(cfg), constants_budget(cfg)};
        finish(acceptance::spacetime_covariance(ctx, p), 8, "fluctuation covariance");
    } else if (sc == "covariance-decay") {
        acceptance::DecorrelationParams p;
        p.beta = cfg.beta;
        p.radii = cfg.radii;
        p.options.s_max = cfg.functional_s_max;
        p.options.dt = cfg.dt;
        p.options.n_samples = cfg.functional_samples;
        p.target = -(cfg.d - 2.0);
        finish(acceptance::decorrelation(ctx, p), 9, "covariance decay");
    } else if (sc == "bracket") {
        acceptance::BracketParams b{{cfg.polymer(), cfg.replicas, cfg.lattice_dx},
                                    constants_budget(cfg)};
        b.ensemble.cfg.backend = polymer::Backend::gram;
        finish(acceptance::bracket_decay(ctx, b), 5, "bracket decay");
        acceptance::GProcessParams g;
        g.ensemble = b.ensemble;
        g.base_t = cfg.t_base;
        g.tau = cfg.tau;
        g.checked_tau.clear();
        std::copy_if(cfg.tau.begin(), cfg.tau.end(), std::back_inserter(g.checked_tau),
                     [](double t) { return t > 1.0; });
        g.c0_budget = b.c0_budget;
        finish(acceptance::bracket_limit(ctx, g), 6, "bracket limit");
    } else if (sc == "averaged") {
        acceptance::AveragedParams p{plan(cfg), cfg.bump_radius, cfg.bump_h, constants_budget(cfg)};
        finish(acceptance::averaged_fluctuations(ctx, p), 10, "averaged fluctuations");
    } else if (sc == "stationary-check") {
        acceptance::StationaryParams p;
        p.beta = cfg.beta;
        p.t = cfg.t_points;
        p.c0_budget = constants_budget(cfg);
        finish(acceptance::stationarity(ctx, p), 11, "stationarity");
    } else if (sc == "limit-sample") {
        finish(limit_sample(ctx, cfg, load_limit_spec(cfg.limit_spec)), 0, "limit samples");
    } else if (sc == "suite") {
        const auto params = acceptance::suite_params(acceptance::parse_profile(cfg.profile), cfg.d,
                                                     cfg.beta);
        std::vector<int> ids = cfg.criteria;
        if (ids.empty()) {
            for (int i = 1; i <= 12; ++i) {
                ids.push_back(i);
            }
        }
        for (int id : ids) {
            ctx.say("criterion " + std::to_string(id) + ": " +
                    acceptance::criterion_titles()[static_cast<std::size_t>(id - 1)]);
            out.push_back(acceptance::run_criterion(ctx, params, id));
        }
    } else {
        throw cli::ConfigError("unknown subcommand '" + sc + "'");
    }
    return out;
}

Outcome run(const cli::ExperimentConfig& cfg, std::ostream& log, std::ostream& err)
{
    Outcome o;
    const auto violations = cfg.violations();
    if (!violations.empty()) {
        for (const auto& v : violations) {
            err << "config: " << v << '\n';
        }
        o.exit_code = invalid_config;
        return o;
    }
    if (cfg.subcommand == "limit-sample") {
        try {
            (void)load_limit_spec(cfg.limit_spec);
        } catch (const std::exception& e) {
            err << "config: " << e.what() << '\n';
            o.exit_code = invalid_config;
            return o;
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    records::Manifest manifest;
    manifest.subcommand = cfg.subcommand;
    manifest.config_toml = cli::to_toml(cfg);
    manifest.seed = cfg.seed;

    const fs::path dir(cfg.out);
    try {
        fs::create_directories(dir);
        write_text(dir / "config.toml", manifest.config_toml);
        o.files.push_back("config.toml");

        acceptance::Context ctx(cfg.d, cfg.seed, cfg.threads, &log);
        ctx.set_budget(cfg.wall_limit, cfg.max_paths);
        o.results = checks(ctx, cfg);

        bool exhausted = false;
        bool pass = true;
        for (const auto& r : o.results) {
            const std::string prefix =
                cfg.subcommand == "suite" ? "c" + std::string(r.id < 10 ? "0" : "") +
                                                std::to_string(r.id) + "_"
                                          : "";
            for (const auto& a : r.artifacts) {
                write_text(dir / (prefix + a.file), a.content);
                o.files.push_back(prefix + a.file);
            }
            for (const auto& n : r.notes) {
                manifest.notes.push_back(prefix + n);
            }
            exhausted = exhausted || r.budget_exhausted;
            pass = pass && r.pass();
            log << (r.pass() ? "PASS " : "FAIL ") << r.title << '\n';
        }
        write_text(dir / "reports.json", acceptance::to_json(o.results));
        o.files.push_back("reports.json");
        manifest.budget_exhausted = exhausted;
        o.exit_code = exhausted ? budget_exhausted : (pass ? ok : check_failed);
    } catch (const cli::ConfigError& e) {
        err << "config: " << e.what() << '\n';
        o.exit_code = invalid_config;
        return o;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        manifest.notes.push_back(std::string("error: ") + e.what());
        o.exit_code = runtime_failure;
    }

    manifest.exit_code = o.exit_code;
    manifest.files = o.files;
    manifest.files.push_back("manifest.json");
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        write_text(dir / "manifest.json", records::manifest_json(manifest));
        o.files.push_back("manifest.json");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        o.exit_code = runtime_failure;
    }
    return o;
}

}  // namespace pshe::experiment
