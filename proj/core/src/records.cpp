#include "pshe/records.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

namespace pshe::records {

namespace {

nlohmann::json estimate(const constants::Estimate& e)
{
    return {{"value", e.value}, {"se", e.se}, {"samples", e.samples}};
}

void row(std::ostringstream& os, const std::vector<double>& values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        os << (i ? "," : "") << format(values[i]);
    }
    os << '\n';
}

}  // namespace

const std::map<std::string, int>& schema_versions()
{
    static const std::map<std::string, int> v{
        {"samples.csv", 1},     {"fluctuation.csv", 1}, {"gprocess.csv", 1},
        {"constants.csv", 1},   {"constants.json", 1},  {"reports.json", 1},
        {"limit_samples.csv", 1}, {"table.csv", 1},     {"manifest.json", 1},
    };
    return v;
}

std::string format(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string samples_csv(const std::vector<polymer::PolymerSample>& samples)
{
    std::ostringstream os;
    const int d = samples.empty() ? 3 : samples.front().d;
    os << "replica,backend,beta,T";
    for (int c = 0; c < d; ++c) {
        os << ",x" << c;
    }
    os << ",Z,logZ,max_jitter,windows,largest_component,wrap_events\n";
    for (const auto& s : samples) {
        for (std::size_t k = 0; k < s.horizons.size(); ++k) {
            for (int m = 0; m < s.n_starts(); ++m) {
                os << s.replica << ',' << polymer::to_string(s.backend) << ',' << format(s.beta)
                   << ',' << format(s.horizons[k]);
                for (int c = 0; c < d; ++c) {
                    os << ',' << format(s.starts[static_cast<std::size_t>(m) * d + c]);
                }
                os << ',' << format(s.at(k, m)) << ',' << format(s.log_at(k, m)) << ','
                   << format(s.diag.max_jitter) << ',' << s.diag.windows << ','
                   << s.diag.largest_component << ',' << s.diag.wrap_events << '\n';
            }
        }
    }
    return os.str();
}

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) {
        os << (i ? "," : "") << header[i];
    }
    os << '\n';
    for (const auto& r : rows) {
        row(os, r);
    }
    return os.str();
}

std::string constants_json(const constants::ConstantsTable& t)
{
    nlohmann::json j;
    j["beta"] = t.beta;
    j["d"] = t.d;
    j["gamma_sq"] = estimate(t.gamma_sq);
    j["gbar_sq"] = estimate(t.gbar_sq);
    j["c0_a"] = estimate(t.c0_a);
    j["c0_b"] = estimate(t.c0_b);
    j["c1"] = estimate(t.c1);
    j["c2"] = t.c2;
    j["c2_mc"] = estimate(t.c2_mc);
    j["khasminskii_margin"] = t.khasminskii;
    j["flagged_nodes"] = t.flagged_nodes;
    j["budget"] = {{"nodes", t.budget.nodes},
                   {"samples_per_node", t.budget.samples_per_node},
                   {"c1_samples", t.budget.c1_samples},
                   {"s_max", t.budget.s_max},
                   {"dt", t.budget.dt},
                   {"seed", t.budget.seed}};
    return j.dump(2);
}

std::string constants_csv(const constants::ConstantsTable& t)
{
    std::ostringstream os;
    os << "name,value,se,samples\n";
    auto put = [&](const char* n, const constants::Estimate& e) {
        os << n << ',' << format(e.value) << ',' << format(e.se) << ',' << e.samples << '\n';
    };
    put("gamma_sq", t.gamma_sq);
    put("gbar_sq", t.gbar_sq);
    put("c0_a", t.c0_a);
    put("c0_b", t.c0_b);
    put("c1", t.c1);
    put("c2", {t.c2, 0.0, 0});
    put("c2_mc", t.c2_mc);
    put("khasminskii_margin", {t.khasminskii, 0.0, 0});
    return os.str();
}

std::string fluctuation_csv(const polymer::FluctuationSet& s)
{
    std::ostringstream os;
    os << "replica,t";
    for (int c = 0; c < s.d; ++c) {
        os << ",x" << c;
    }
    os << ",value\n";
    for (std::int64_t r = 0; r < s.replicas; ++r) {
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            for (int m = 0; m < s.n_points(); ++m) {
                os << r << ',' << format(s.t[i]);
                for (int c = 0; c < s.d; ++c) {
                    os << ',' << format(s.points[static_cast<std::size_t>(m) * s.d + c]);
                }
                os << ',' << format(s.at(r, i, m)) << '\n';
            }
        }
    }
    return os.str();
}

std::string gprocess_csv(const polymer::GProcess& g)
{
    std::ostringstream os;
    os << "replica,tau,value\n";
    const std::size_t n = g.tau.size();
    for (std::int64_t r = 0; r < g.replicas; ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            os << r << ',' << format(g.tau[j]) << ','
               << format(g.values[static_cast<std::size_t>(r) * n + j]) << '\n';
        }
    }
    return os.str();
}

std::string limit_samples_csv(const limits::LimitSamples& s)
{
    std::ostringstream os;
    os << "sample";
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
        os << ",p" << j;
    }
    os << '\n';
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
        os << i;
        for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
            os << ',' << format(s.values(i, j));
        }
        os << '\n';
    }
    return os.str();
}

limits::GaussianLimitSpec parse_limit_spec(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("limit spec: ") + e.what());
    }
    try {
        const auto field = limits::parse_field(j.at("field").get<std::string>());
        const int d = j.at("d").get<int>();
        std::vector<limits::SpaceTimePoint> pts;
        for (const auto& p : j.at("points")) {
            pts.push_back({p.at("t").get<double>(), p.at("x").get<std::vector<double>>()});
        }
        const double amp = j.contains("amp_sq") ? j["amp_sq"].get<double>()
                                                : std::numeric_limits<double>::quiet_NaN();
        const limits::Smoothing sm{j.value("smoothing", 0.0)};
        return limits::make_limit_spec(field, d, pts, j.at("gamma_sq").get<double>(),
                                       j.value("gbar_sq", 0.0), amp, sm);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("limit spec: ") + e.what());
    }
}

std::string limit_spec_json(const limits::GaussianLimitSpec& s)
{
    nlohmann::json j;
    j["field"] = limits::to_string(s.field);
    j["d"] = s.d;
    j["gamma_sq"] = s.gamma_sq;
    j["gbar_sq"] = s.gbar_sq;
    j["amp_sq"] = s.amp_sq;
    j["smoothing"] = s.smoothing.variance;
    j["points"] = nlohmann::json::array();
    for (const auto& p : s.points) {
        j["points"].push_back({{"t", p.t}, {"x", p.x}});
    }
    nlohmann::json c = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.covariance.rows(); ++i) {
        std::vector<double> r(s.covariance.cols());
        for (Eigen::Index k = 0; k < s.covariance.cols(); ++k) {
            r[k] = s.covariance(i, k);
        }
        c.push_back(r);
    }
    j["covariance"] = c;
    return j.dump(2);
}

std::string manifest_json(const Manifest& m)
{
    nlohmann::json j;
    j["subcommand"] = m.subcommand;
    j["seed"] = m.seed;
    j["config_toml"] = m.config_toml;
    j["wall_seconds"] = m.wall_seconds;
    j["exit_code"] = m.exit_code;
    j["budget_exhausted"] = m.budget_exhausted;
    j["files"] = m.files;
    j["notes"] = m.notes;
    j["schema_versions"] = schema_versions();
    j["versions"] = {
        {"pshe", PSHE_VERSION},
        {"compiler", __VERSION__},
        {"boost", BOOST_LIB_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };
    return j.dump(2);
}

}  // namespace pshe::records
