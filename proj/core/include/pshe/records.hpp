#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pshe/constants.hpp"
#include "pshe/limits.hpp"
#include "pshe/polymer.hpp"

namespace pshe::records {

//! Column schema versions, echoed in every manifest.
const std::map<std::string, int>& schema_versions();

//! Shortest round-trip decimal form.
std::string format(double x);

//! One record per (replica, horizon, start): replica,backend,beta,T,x0..x{d-1},Z,logZ and the
//! replica diagnostics.
std::string samples_csv(const std::vector<polymer::PolymerSample>& samples);

//! Generic numeric table with a header row.
std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

std::string constants_json(const constants::ConstantsTable& t);
std::string constants_csv(const constants::ConstantsTable& t);

//! replica,t,x0..x{d-1},value
std::string fluctuation_csv(const polymer::FluctuationSet& s);

//! replica,tau,value
std::string gprocess_csv(const polymer::GProcess& g);

//! sample,p0..p{n-1}
std::string limit_samples_csv(const limits::LimitSamples& s);

//! {"field": "H", "d": 3, "gamma_sq": .., "gbar_sq": .., "amp_sq": .., "smoothing": ..,
//!  "points": [{"t": .., "x": [..]}, ..]}; amp_sq and smoothing are optional.
limits::GaussianLimitSpec parse_limit_spec(const std::string& json);
std::string limit_spec_json(const limits::GaussianLimitSpec& s);

struct Manifest
{
    std::string subcommand;
    std::string config_toml;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    int exit_code = 0;
    bool budget_exhausted = false;
    std::vector<std::string> files;
    std::vector<std::string> notes;
};

std::string manifest_json(const Manifest& m);

}  // namespace pshe::records
