#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pshe/polymer.hpp"

namespace pshe::cli {

//! Malformed input (unreadable or unparsable TOML, bad override syntax).
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig
{
    std::string subcommand = "simulate-z";
    std::string profile = "desk";
    int d = 3;
    double beta = 0.2;
    double dt = 1e-3;
    int paths = 64;
    std::vector<double> horizons{1.0, 2.0, 4.0, 8.0};
    //! n_starts * d coordinates.
    std::vector<double> starts{0.0, 0.0, 0.0};
    std::int64_t replicas = 200;
    polymer::Backend backend = polymer::Backend::gram;
    std::uint64_t seed = 1;
    std::string out = "pshe-out";
    int threads = 1;
    double lattice_dx = 0.25;
    //! Soft wall-clock limit in seconds; zero disables it.
    double wall_limit = 0.0;
    //! Ceiling on replicas * paths per run.
    std::int64_t max_paths = 100'000'000;

    double t_base = 1.0;
    double t_max = 16.0;
    std::vector<double> t_points{1.0, 2.0};
    //! Unscaled points x (n * d coordinates); starts are x sqrt(t_base).
    std::vector<double> points{0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    std::vector<double> tau{1.0, 2.0, 4.0};
    std::vector<double> radii{2.0, 3.0, 4.0, 6.0, 8.0};
    double bump_radius = 1.0;
    double bump_h = 0.25;

    int nodes = 32;
    std::int64_t samples_per_node = 2000;
    std::int64_t c1_samples = 20000;
    double s_max = 128.0;
    std::int64_t c2_normals = 1'000'000;
    std::int64_t functional_samples = 20000;
    double functional_s_max = 16384.0;

    std::string limit_spec;
    std::int64_t limit_samples = 10000;
    std::vector<int> criteria;

    //! Every violated field, one message per field.
    std::vector<std::string> violations() const;
    polymer::PolymerConfig polymer() const;
};

const std::vector<std::string>& subcommands();

//! Applies a TOML document on top of cfg. Unknown keys are reported as violations.
std::vector<std::string> apply_toml(ExperimentConfig& cfg, const std::string& text,
                                    const std::string& source = "config");

std::vector<std::string> apply_toml_file(ExperimentConfig& cfg, const std::string& path);

//! Applies PSHE_<KEY> variables from env (lists comma-separated, points separated by ';').
std::vector<std::string> apply_env(ExperimentConfig& cfg,
                                   const std::map<std::string, std::string>& env);

//! The PSHE_ variables of the current process.
std::map<std::string, std::string> process_env();

//! Fully resolved configuration as TOML; parsing it back yields the same configuration.
std::string to_toml(const ExperimentConfig& cfg);

}  // namespace pshe::cli
