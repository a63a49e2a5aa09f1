#pragma once

/**
 * @file experiments.hpp
 * @brief Scenario execution and artifact emission.
 *
 * Running a scenario produces a RunResult: a summary (metrics and pass/fail
 * checks) plus named text artifacts. Nothing is written until
 * write_artifacts is called, so identical inputs give identical strings.
 */

#include "viscomem/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace viscomem {

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double bound = 0.0;
};

struct RunSummary {
    std::string scenario;
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<Check> checks;

    bool passed() const;
    double metric(const std::string& name) const;  ///< NaN when absent
    const Check* check(const std::string& name) const;
};

struct RunResult {
    RunSummary summary;
    /// File name -> contents, in emission order; always contains summary.json.
    std::vector<std::pair<std::string, std::string>> artifacts;
};

/// Executes `s.experiment`. Throws ConfigError or SolverError.
RunResult run_experiment(const Scenario& s);

/// Summary as JSON with every double written to 17 significant digits.
std::string summary_json(const RunSummary& summary);

/// Writes the artifacts into `dir` (created if missing).
void write_artifacts(const RunResult& result, const std::string& dir);

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitCheck = 4 };

struct RunOptions {
    std::string out_dir = "out";
    bool strict = false;
    std::optional<std::uint64_t> seed;
    std::optional<Experiment> experiment;  ///< overrides the configured kind
};

/// Loads, runs and writes one scenario into out_dir/<name>; returns the exit code
/// and prints a one-line status (or the error) to `log`.
int run_scenario_file(const std::string& path, const RunOptions& opts, std::ostream& log);

}  // namespace viscomem
