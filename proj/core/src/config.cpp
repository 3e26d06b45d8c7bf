#include "pshe/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <variant>

#include <toml.hpp>

extern char** environ;

namespace pshe::cli {

namespace {

struct FlatPoints
{
    std::vector<double> ExperimentConfig::*member;
};

using Member =
    std::variant<int ExperimentConfig::*, std::int64_t ExperimentConfig::*,
                 std::uint64_t ExperimentConfig::*, double ExperimentConfig::*,
                 std::string ExperimentConfig::*, std::vector<double> ExperimentConfig::*,
                 std::vector<int> ExperimentConfig::*, polymer::Backend ExperimentConfig::*,
                 FlatPoints>;

struct Key
{
    const char* name;
    Member member;
};

const std::vector<Key>& keys()
{
    using C = ExperimentConfig;
    static const std::vector<Key> k{
        {"subcommand", &C::subcommand},
        {"profile", &C::profile},
        {"d", &C::d},
        {"beta", &C::beta},
        {"dt", &C::dt},
        {"paths", &C::paths},
        {"horizons", &C::horizons},
        {"starts", FlatPoints{&C::starts}},
        {"replicas", &C::replicas},
        {"backend", &C::backend},
        {"seed", &C::seed},
        {"out", &C::out},
        {"threads", &C::threads},
        {"lattice_dx", &C::lattice_dx},
        {"wall_limit", &C::wall_limit},
        {"max_paths", &C::max_paths},
        {"t_base", &C::t_base},
        {"t_max", &C::t_max},
        {"t_points", &C::t_points},
        {"points", FlatPoints{&C::points}},
        {"tau", &C::tau},
        {"radii", &C::radii},
        {"bump_radius", &C::bump_radius},
        {"bump_h", &C::bump_h},
        {"nodes", &C::nodes},
        {"samples_per_node", &C::samples_per_node},
        {"c1_samples", &C::c1_samples},
        {"s_max", &C::s_max},
        {"c2_normals", &C::c2_normals},
        {"functional_samples", &C::functional_samples},
        {"functional_s_max", &C::functional_s_max},
        {"limit_spec", &C::limit_spec},
        {"limit_samples", &C::limit_samples},
        {"criteria", &C::criteria},
    };
    return k;
}

const Key* find_key(const std::string& name)
{
    for (const auto& k : keys()) {
        if (name == k.name) {
            return &k;
        }
    }
    return nullptr;
}

template <class T>
bool parse_number(std::string_view s, T& out)
{
    while (!s.empty() && s.front() == ' ') {
        s.remove_prefix(1);
    }
    while (!s.empty() && s.back() == ' ') {
        s.remove_suffix(1);
    }
    if (s.empty()) {
        return false;
    }
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for doubles does not accept a leading '+'.
        if (s.front() == '+') {
            s.remove_prefix(1);
        }
    }
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Sets a field from its string form (environment overrides). Returns an error message or "".
std::string set_from_string(ExperimentConfig& cfg, const Key& key, const std::string& text)
{
    const std::string bad = std::string(key.name) + ": cannot parse '" + text + "'";
    return std::visit(
        [&](auto&& m) -> std::string {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, int ExperimentConfig::*> ||
                          std::is_same_v<M, std::int64_t ExperimentConfig::*> ||
                          std::is_same_v<M, std::uint64_t ExperimentConfig::*> ||
                          std::is_same_v<M, double ExperimentConfig::*>) {
                return parse_number(text, cfg.*m) ? "" : bad;
            } else if constexpr (std::is_same_v<M, std::string ExperimentConfig::*>) {
                cfg.*m = text;
                return "";
            } else if constexpr (std::is_same_v<M, polymer::Backend ExperimentConfig::*>) {
                try {
                    cfg.*m = polymer::parse_backend(text);
                } catch (const std::exception&) {
                    return std::string(key.name) + ": expected gram or field, got '" + text + "'";
                }
                return "";
            } else if constexpr (std::is_same_v<M, std::vector<double> ExperimentConfig::*> ||
                                 std::is_same_v<M, std::vector<int> ExperimentConfig::*>) {
                using V = typename std::decay_t<decltype(cfg.*m)>::value_type;
                std::vector<V> v;
                if (!text.empty()) {
                    for (const auto& part : split(text, ',')) {
                        V x{};
                        if (!parse_number(part, x)) {
                            return bad;
                        }
                        v.push_back(x);
                    }
                }
                cfg.*m = v;
                return "";
            } else {
                std::vector<double> v;
                for (const auto& point : split(text, ';')) {
                    for (const auto& part : split(point, ',')) {
                        double x = 0.0;
                        if (!parse_number(part, x)) {
                            return bad;
                        }
                        v.push_back(x);
                    }
                }
                cfg.*(m.member) = v;
                return "";
            }
        },
        key.member);
}

std::string type_error(const Key& key, const char* expected)
{
    return std::string(key.name) + ": expected " + expected;
}

bool number_list(const toml::array& a, std::vector<double>& out)
{
    for (const auto& e : a) {
        const auto x = e.value<double>();
        if (!x) {
            return false;
        }
        out.push_back(*x);
    }
    return true;
}

std::string set_from_toml(ExperimentConfig& cfg, const Key& key, const toml::node& node)
{
    return std::visit(
        [&](auto&& m) -> std::string {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, int ExperimentConfig::*>) {
                const auto x = node.value_exact<std::int64_t>();
                if (!x || *x < std::numeric_limits<int>::min() || *x > std::numeric_limits<int>::max()) {
                    return type_error(key, "an integer");
                }
                cfg.*m = static_cast<int>(*x);
            } else if constexpr (std::is_same_v<M, std::int64_t ExperimentConfig::*>) {
                const auto x = node.value_exact<std::int64_t>();
                if (!x) {
                    return type_error(key, "an integer");
                }
                cfg.*m = *x;
            } else if constexpr (std::is_same_v<M, std::uint64_t ExperimentConfig::*>) {
                // Seeds above 2^63 are written as strings.
                if (const auto x = node.value_exact<std::int64_t>(); x && *x >= 0) {
                    cfg.*m = static_cast<std::uint64_t>(*x);
                } else if (const auto s = node.value_exact<std::string>();
                           !s || !parse_number(*s, cfg.*m)) {
                    return type_error(key, "a nonnegative integer");
                }
            } else if constexpr (std::is_same_v<M, double ExperimentConfig::*>) {
                const auto x = node.value<double>();
                if (!x || node.is_boolean()) {
                    return type_error(key, "a number");
                }
                cfg.*m = *x;
            } else if constexpr (std::is_same_v<M, std::string ExperimentConfig::*>) {
                const auto x = node.value_exact<std::string>();
                if (!x) {
                    return type_error(key, "a string");
                }
                cfg.*m = *x;
            } else if constexpr (std::is_same_v<M, polymer::Backend ExperimentConfig::*>) {
                const auto x = node.value_exact<std::string>();
                if (!x) {
                    return type_error(key, "a string");
                }
                return set_from_string(cfg, key, *x);
            } else if constexpr (std::is_same_v<M, std::vector<double> ExperimentConfig::*>) {
                const auto* a = node.as_array();
                std::vector<double> v;
                if (!a || !number_list(*a, v)) {
                    return type_error(key, "an array of numbers");
                }
                cfg.*m = v;
            } else if constexpr (std::is_same_v<M, std::vector<int> ExperimentConfig::*>) {
                const auto* a = node.as_array();
                std::vector<int> v;
                if (!a) {
                    return type_error(key, "an array of integers");
                }
                for (const auto& e : *a) {
                    const auto x = e.value_exact<std::int64_t>();
                    if (!x) {
                        return type_error(key, "an array of integers");
                    }
                    v.push_back(static_cast<int>(*x));
                }
                cfg.*m = v;
            } else {
                const auto* a = node.as_array();
                std::vector<double> v;
                if (!a) {
                    return type_error(key, "an array of points");
                }
                for (const auto& e : *a) {
                    const auto* inner = e.as_array();
                    if (inner ? !number_list(*inner, v) : !e.value<double>()) {
                        return type_error(key, "an array of points");
                    }
                    if (!inner) {
                        v.push_back(*e.value<double>());
                    }
                }
                cfg.*(m.member) = v;
            }
            return "";
        },
        key.member);
}

void put(toml::table& t, const Key& key, const ExperimentConfig& cfg)
{
    std::visit(
        [&](auto&& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, int ExperimentConfig::*> ||
                          std::is_same_v<M, std::int64_t ExperimentConfig::*>) {
                t.insert(key.name, static_cast<std::int64_t>(cfg.*m));
            } else if constexpr (std::is_same_v<M, std::uint64_t ExperimentConfig::*>) {
                const std::uint64_t s = cfg.*m;
                if (s <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                    t.insert(key.name, static_cast<std::int64_t>(s));
                } else {
                    t.insert(key.name, std::to_string(s));
                }
            } else if constexpr (std::is_same_v<M, double ExperimentConfig::*>) {
                t.insert(key.name, cfg.*m);
            } else if constexpr (std::is_same_v<M, std::string ExperimentConfig::*>) {
                t.insert(key.name, cfg.*m);
            } else if constexpr (std::is_same_v<M, polymer::Backend ExperimentConfig::*>) {
                t.insert(key.name, polymer::to_string(cfg.*m));
            } else if constexpr (std::is_same_v<M, std::vector<double> ExperimentConfig::*>) {
                toml::array a;
                for (double x : cfg.*m) {
                    a.push_back(x);
                }
                t.insert(key.name, a);
            } else if constexpr (std::is_same_v<M, std::vector<int> ExperimentConfig::*>) {
                toml::array a;
                for (int x : cfg.*m) {
                    a.push_back(static_cast<std::int64_t>(x));
                }
                t.insert(key.name, a);
            } else {
                toml::array a;
                const auto& v = cfg.*(m.member);
                const int d = std::max(cfg.d, 1);
                for (std::size_t i = 0; i + d <= v.size(); i += d) {
                    toml::array p;
                    for (int c = 0; c < d; ++c) {
                        p.push_back(v[i + c]);
                    }
                    a.push_back(p);
                }
                t.insert(key.name, a);
            }
        },
        key.member);
}

bool on_grid(double t, double dt)
{
    const double k = std::round(t / dt);
    return k >= 1.0 && std::abs(k * dt - t) <= 1e-9 * std::max(t, dt);
}

}  // namespace

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> s{"constants",        "simulate-z", "fluctuation",
                                            "covariance-decay", "bracket",    "averaged",
                                            "stationary-check", "limit-sample", "suite"};
    return s;
}

std::vector<std::string> ExperimentConfig::violations() const
{
    std::vector<std::string> v;
    const auto& sc = subcommands();
    if (std::find(sc.begin(), sc.end(), subcommand) == sc.end()) {
        v.push_back("subcommand: unknown '" + subcommand + "'");
    }
    if (profile != "desk" && profile != "full") {
        v.push_back("profile: expected desk or full");
    }
    if (d < 3) {
        v.push_back("d: must be at least 3");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        v.push_back("beta: must be a nonnegative real");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        v.push_back("dt: must be positive");
    }
    if (paths < 1) {
        v.push_back("paths: must be at least 1");
    }
    if (horizons.empty()) {
        v.push_back("horizons: must be nonempty");
    } else {
        for (std::size_t i = 0; i < horizons.size(); ++i) {
            if (!(horizons[i] > 0.0) || (i > 0 && horizons[i] <= horizons[i - 1])) {
                v.push_back("horizons: must be positive and strictly increasing");
                break;
            }
            if (dt > 0.0 && !on_grid(horizons[i], dt)) {
                v.push_back("horizons: must be multiples of dt");
                break;
            }
        }
    }
    if (d >= 3 && (starts.empty() || starts.size() % static_cast<std::size_t>(d) != 0)) {
        v.push_back("starts: need a nonempty list of d-dimensional points");
    }
    if (replicas < 1) {
        v.push_back("replicas: must be at least 1");
    }
    if (threads < 1) {
        v.push_back("threads: must be at least 1");
    }
    if (out.empty()) {
        v.push_back("out: must be a nonempty path");
    }
    if (!(lattice_dx > 0.0) || lattice_dx > 0.25 + 1e-15 ||
        std::abs(std::round(1.0 / lattice_dx) - 1.0 / lattice_dx) > 1e-9) {
        v.push_back("lattice_dx: must be 1/k for an integer k >= 4");
    }
    if (!(wall_limit >= 0.0)) {
        v.push_back("wall_limit: must be nonnegative");
    }
    if (max_paths < 1) {
        v.push_back("max_paths: must be at least 1");
    }
    if (!(t_base > 0.0)) {
        v.push_back("t_base: must be positive");
    }
    if (!(t_max >= 16.0 * t_base * (1.0 - 1e-12))) {
        v.push_back("t_max: must be at least 16 t_base");
    }
    if (t_points.empty()) {
        v.push_back("t_points: must be nonempty");
    }
    for (double t : t_points) {
        if (!(t > 0.0) || t * t_base >= t_max || (dt > 0.0 && !on_grid(t * t_base, dt))) {
            v.push_back("t_points: need 0 < t t_base < t_max on the dt grid");
            break;
        }
    }
    if (dt > 0.0 && t_max > 0.0 && !on_grid(t_max, dt)) {
        v.push_back("t_max: must be a multiple of dt");
    }
    if (d >= 3 && (points.empty() || points.size() % static_cast<std::size_t>(d) != 0)) {
        v.push_back("points: need a nonempty list of d-dimensional points");
    }
    if (tau.empty() || tau.front() != 1.0 ||
        !std::is_sorted(tau.begin(), tau.end(), std::less_equal<double>())) {
        v.push_back("tau: must start at 1 and be strictly increasing");
    }
    if (radii.size() < 4 ||
        std::any_of(radii.begin(), radii.end(), [](double r) { return !(r > 0.0); })) {
        v.push_back("radii: need at least 4 positive radii");
    }
    if (!(bump_radius > 0.0)) {
        v.push_back("bump_radius: must be positive");
    }
    if (!(bump_h > 0.0) || bump_h > 0.25 * bump_radius * (1.0 + 1e-12)) {
        v.push_back("bump_h: must be positive and at most bump_radius / 4");
    }
    if (nodes < 2) {
        v.push_back("nodes: must be at least 2");
    }
    if (samples_per_node < 2) {
        v.push_back("samples_per_node: must be at least 2");
    }
    if (c1_samples < 2) {
        v.push_back("c1_samples: must be at least 2");
    }
    if (!(s_max >= 64.0)) {
        v.push_back("s_max: must be at least 64");
    }
    if (c2_normals < 2 * d) {
        v.push_back("c2_normals: too few normals");
    }
    if (functional_samples < 2) {
        v.push_back("functional_samples: must be at least 2");
    }
    if (!(functional_s_max >= 64.0)) {
        v.push_back("functional_s_max: must be at least 64");
    }
    if (subcommand == "limit-sample" && limit_spec.empty()) {
        v.push_back("limit_spec: required by limit-sample");
    }
    if (limit_samples < 1) {
        v.push_back("limit_samples: must be at least 1");
    }
    for (int c : criteria) {
        if (c < 1 || c > 12) {
            v.push_back("criteria: entries must lie in 1..12");
            break;
        }
    }
    return v;
}

polymer::PolymerConfig ExperimentConfig::polymer() const
{
    polymer::PolymerConfig p;
    p.d = d;
    p.beta = beta;
    p.dt = dt;
    p.paths_per_start = paths;
    p.horizons = horizons;
    p.starts = starts;
    p.backend = backend;
    p.seed = seed;
    return p;
}

std::vector<std::string> apply_toml(ExperimentConfig& cfg, const std::string& text,
                                    const std::string& source)
{
    toml::table table;
    try {
        table = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
           << e.description();
        throw ConfigError(os.str());
    }
    std::vector<std::string> v;
    for (const auto& [name, node] : table) {
        const std::string key(name.str());
        const Key* k = find_key(key);
        if (!k) {
            v.push_back(key + ": unknown key");
            continue;
        }
        if (auto e = set_from_toml(cfg, *k, node); !e.empty()) {
            v.push_back(e);
        }
    }
    return v;
}

std::vector<std::string> apply_toml_file(ExperimentConfig& cfg, const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return apply_toml(cfg, ss.str(), path);
}

std::vector<std::string> apply_env(ExperimentConfig& cfg,
                                   const std::map<std::string, std::string>& env)
{
    std::vector<std::string> v;
    for (const auto& [name, value] : env) {
        if (name.rfind("PSHE_", 0) != 0) {
            continue;
        }
        std::string key = name.substr(5);
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        const Key* k = find_key(key);
        if (!k) {
            v.push_back(name + ": unknown override");
            continue;
        }
        if (auto e = set_from_string(cfg, *k, value); !e.empty()) {
            v.push_back(name + ": " + e);
        }
    }
    return v;
}

std::map<std::string, std::string> process_env()
{
    std::map<std::string, std::string> out;
    for (char** e = environ; e && *e; ++e) {
        const std::string s(*e);
        const auto eq = s.find('=');
        if (eq != std::string::npos && s.rfind("PSHE_", 0) == 0) {
            out[s.substr(0, eq)] = s.substr(eq + 1);
        }
    }
    return out;
}

std::string to_toml(const ExperimentConfig& cfg)
{
    toml::table t;
    for (const auto& k : keys()) {
        put(t, k, cfg);
    }
    std::ostringstream os;
    os << t << '\n';
    return os.str();
}

}  // namespace pshe::cli
