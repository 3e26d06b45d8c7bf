#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pshe/acceptance.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria 1..12, one line per criterion"};
    std::string profile = "desk";
    double beta = 0.2;
    std::uint64_t seed = 20240611;
    int threads = 1;
    std::string out;
    std::vector<int> criteria;
    app.add_option("--profile", profile)->check(CLI::IsMember({"desk", "full"}));
    app.add_option("--beta", beta);
    app.add_option("--seed", seed);
    app.add_option("--threads", threads);
    app.add_option("--out", out, "Directory for reports.json and the check artifacts");
    app.add_option("--criteria", criteria)->check(CLI::Range(1, 12));
    CLI11_PARSE(app, argc, argv);
    if (criteria.empty()) {
        for (int i = 1; i <= 12; ++i) {
            criteria.push_back(i);
        }
    }

    using namespace pshe::acceptance;
    Context ctx(3, seed, threads, &std::cerr);
    const SuiteParams params = suite_params(parse_profile(profile), 3, beta);
    std::vector<CheckResult> results;
    for (int id : criteria) {
        CheckResult r;
        try {
            r = run_criterion(ctx, params, id);
        } catch (const std::exception& e) {
            r.id = id;
            r.title = criterion_titles()[static_cast<std::size_t>(id - 1)];
            r.notes.push_back(std::string("error: ") + e.what());
        }
        std::printf("criterion %2d  %s  %-28s %8.1fs", r.id, r.pass() ? "PASS" : "FAIL",
                    r.title.c_str(), r.seconds);
        for (const auto& rep : r.reports) {
            if (!rep.informational && !rep.pass()) {
                std::printf("  [%s: %.4g vs %.4g]", rep.name.c_str(), rep.statistic,
                            rep.critical);
                break;
            }
        }
        for (const auto& n : r.notes) {
            if (n.rfind("error:", 0) == 0) {
                std::printf("  [%s]", n.c_str());
            }
        }
        std::printf("\n");
        std::fflush(stdout);
        results.push_back(std::move(r));
    }

    if (!out.empty()) {
        std::filesystem::create_directories(out);
        std::ofstream(std::filesystem::path(out) / "reports.json") << to_json(results);
        for (const auto& r : results) {
            const std::string prefix = "c" + std::string(r.id < 10 ? "0" : "") +
                                       std::to_string(r.id) + "_";
            for (const auto& a : r.artifacts) {
                std::ofstream(std::filesystem::path(out) / (prefix + a.file)) << a.content;
            }
        }
    }

    int passed = 0;
    for (const auto& r : results) {
        passed += r.pass() ? 1 : 0;
    }
    std::printf("acceptance: %d/%zu criteria pass (beta %g, %s profile)\n", passed, results.size(),
                beta, profile.c_str());
    return passed == static_cast<int>(results.size()) ? 0 : 1;
}
