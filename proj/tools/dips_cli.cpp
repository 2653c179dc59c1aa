// dips: command-line driver for the rare-event estimators.
//
// Exit status: 0 success, 1 invalid configuration or usage, 2 runtime failure.

#include <CLI11.hpp>

#include <iostream>

#include "dips/config.hpp"
#include "dips/errors.hpp"
#include "dips/experiment.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rare-event probability estimation with DIRECT partitioning and interacting particle systems"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    app.add_option("--config", config_path, "Experiment configuration (INI)")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Root seed, overrides experiment.seed");
    app.add_option("--workers", workers, "Worker threads (0: configuration or OpenMP default)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out-dir", out_dir, "Output directory, overrides output.directory");
    app.add_option("--format", format, "csv or csv+svg")->check(CLI::IsMember({"csv", "csv+svg"}));

    std::vector<double> point;
    auto* sim = app.add_subcommand("simulate", "Single trajectory at a parameter point");
    sim->add_option("--point", point, "Physical parameter values in configuration order")->expected(1, -1)->delimiter(',');

    auto* basic = app.add_subcommand("estimate-basic", "Crisp DIRECT estimator");
    auto* dips_cmd = app.add_subcommand("estimate-dips", "DIRECT partition with in-box IPS");
    auto* outer = app.add_subcommand("estimate-outer-mu", "DIRECT partition with crude in-box hit ratios");
    auto* ips = app.add_subcommand("estimate-ips", "IPS at the nominal parameter point");
    bool fixed = false, adaptive = false;
    auto* fixed_flag = ips->add_flag("--fixed", fixed, "Fixed filtration schedule");
    auto* adaptive_flag = ips->add_flag("--adaptive", adaptive, "Adaptive filtration");
    fixed_flag->excludes(adaptive_flag);
    auto* extrap = app.add_subcommand("estimate-extrapolation", "Reliability-index extrapolation");

    std::vector<std::string> inputs;
    auto* rw = app.add_subcommand("reweight", "Reuse stored partitions under perturbed moments");
    rw->add_option("--partition", inputs, "Partition files (default: all in the output directory)")
        ->check(CLI::ExistingFile);
    auto* report = app.add_subcommand("report", "Interval, timing and plot files from stored runs");
    report->add_option("--runs", inputs, "Run files (default: all in the output directory)")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    dips::Command cmd = dips::Command::report;
    if (sim->parsed()) cmd = dips::Command::simulate;
    else if (basic->parsed()) cmd = dips::Command::estimate_basic;
    else if (dips_cmd->parsed()) cmd = dips::Command::estimate_dips;
    else if (outer->parsed()) cmd = dips::Command::estimate_outer_mu;
    else if (ips->parsed()) {
        if (!fixed && !adaptive) {
            std::cerr << "estimate-ips: choose --fixed or --adaptive\n";
            return kExitValidation;
        }
        cmd = adaptive ? dips::Command::estimate_ips_adaptive : dips::Command::estimate_ips_fixed;
    } else if (extrap->parsed()) cmd = dips::Command::estimate_extrapolation;
    else if (rw->parsed()) cmd = dips::Command::reweight;

    dips::ExperimentConfig cfg;
    try {
        cfg = dips::parse_config(config_path);
    } catch (const dips::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return kExitValidation;
    }

    dips::CommandOptions opt;
    opt.out_dir = out_dir;
    opt.seed = seed;
    opt.workers = workers;
    if (format) opt.svg = *format == "csv+svg";
    opt.inputs = inputs;
    opt.point = point;
    opt.log = &std::cerr;

    try {
        const auto res = dips::run_command(cfg, cmd, opt);
        for (const auto& r : res.records) {
            if (cmd == dips::Command::simulate) {
                std::cout << "d = " << r.probabilities.front() << "\n";
                continue;
            }
            std::cout << r.algorithm << " run " << r.run << ":";
            for (std::size_t l = 0; l < r.probabilities.size(); ++l)
                std::cout << " P(" << r.thresholds[l] << ")=" << r.probabilities[l];
            std::cout << (r.no_target ? " [no target]" : "") << "\n";
        }
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& a : res.artifacts) std::cerr << "wrote " << a << "\n";
    } catch (const dips::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const dips::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
