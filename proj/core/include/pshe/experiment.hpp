#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pshe/acceptance.hpp"
#include "pshe/config.hpp"

namespace pshe::experiment {

enum ExitCode : int
{
    ok = 0,
    check_failed = 1,
    invalid_config = 2,
    budget_exhausted = 3,
    runtime_failure = 4,
};

struct Outcome
{
    int exit_code = ok;
    std::vector<acceptance::CheckResult> results;
    std::vector<std::string> files;
};

//! Checks a resolved configuration; on violations nothing is written and the exit code is 2.
//! Otherwise runs the subcommand and writes its CSV files, reports.json, manifest.json and the
//! resolved config.toml into cfg.out.
Outcome run(const cli::ExperimentConfig& cfg, std::ostream& log, std::ostream& err);

//! The checks a subcommand performs, without touching the file system.
std::vector<acceptance::CheckResult> checks(acceptance::Context& ctx,
                                            const cli::ExperimentConfig& cfg);

}  // namespace pshe::experiment
