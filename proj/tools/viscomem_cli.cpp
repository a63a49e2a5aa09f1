#include "viscomem/experiments.hpp"

#include <CLI11.hpp>

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace {

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    std::vector<std::string> out;
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    std::sort(out.begin(), out.end());
    return out;
}

int sweep(const std::vector<std::string>& files, const viscomem::RunOptions& opts, unsigned jobs) {
    std::vector<int> codes(files.size(), 0);
    std::vector<std::string> logs(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            std::ostringstream log;
            codes[i] = viscomem::run_scenario_file(files[i], opts, log);
            logs[i] = log.str();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int worst = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::cout << logs[i];
        worst = std::max(worst, codes[i]);
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and diagnostics for viscoelastic wave equations with fading memory"};
    app.require_subcommand(1);

    viscomem::RunOptions opts;
    std::uint64_t seed = 0;
    app.add_flag("--strict", opts.strict, "Exit with status 4 when any monitored inequality fails");
    app.add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");

    std::string config;
    auto* run = app.add_subcommand("run", "Run the experiment configured in a scenario file");
    run->add_option("config", config, "Scenario JSON file")->required();
    auto* certify = app.add_subcommand("certify-kernel", "Certify the memory kernel of a scenario");
    certify->add_option("config", config, "Scenario JSON file")->required();
    auto* equilibria = app.add_subcommand("equilibria", "Compute stationary states of a scenario");
    equilibria->add_option("config", config, "Scenario JSON file")->required();

    std::string pattern;
    unsigned jobs = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run every scenario matching a glob pattern");
    sweep_cmd->add_option("pattern", pattern, "Glob pattern of scenario files")->required();
    sweep_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    for (auto* sub : {run, certify, equilibria, sweep_cmd}) {
        sub->add_flag("--strict", opts.strict, "Exit with status 4 when any monitored inequality fails");
        sub->add_option("--out", opts.out_dir, "Output directory");
        sub->add_option("--seed", seed, "Override the scenario seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : viscomem::kExitConfig;
    }
    bool seed_given = seed_opt->count() > 0;
    for (auto* sub : {run, certify, equilibria, sweep_cmd}) seed_given = seed_given || sub->get_option("--seed")->count() > 0;
    if (seed_given) opts.seed = seed;

    if (certify->parsed()) opts.experiment = viscomem::Experiment::KernelCertify;
    if (equilibria->parsed()) opts.experiment = viscomem::Experiment::Equilibria;

    if (sweep_cmd->parsed()) {
        const auto files = expand_glob(pattern);
        if (files.empty()) {
            std::cerr << "no scenario files match '" << pattern << "'\n";
            return viscomem::kExitConfig;
        }
        return sweep(files, opts, jobs);
    }
    return viscomem::run_scenario_file(config, opts, std::cout);
}
