#pragma once

// Orchestration of the estimator subcommands: builds the model named in the
// configuration, dispatches N_r independent runs, and writes result files.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dips/config.hpp"
#include "dips/report.hpp"

namespace dips {

enum class Command {
    simulate,
    estimate_basic,
    estimate_dips,
    estimate_outer_mu,
    estimate_ips_fixed,
    estimate_ips_adaptive,
    estimate_extrapolation,
    reweight,
    report,
};

std::string algorithm_name(Command c);

struct CommandOptions {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<bool> svg;
    int workers = 0;                       // 0 -> config value
    std::vector<std::string> inputs;       // partition or run files for reweight/report
    std::vector<double> point;             // simulate: physical point
    std::ostream* log = nullptr;
};

struct CommandResult {
    std::vector<RunRecord> records;
    std::vector<std::string> artifacts;
    std::vector<std::string> warnings;
};

CommandResult run_command(const ExperimentConfig& cfg, Command cmd, const CommandOptions& opt = {});

// Regenerates interval, timing and plot files from the run files in `dir`.
// Never runs a simulation.
CommandResult write_reports(const std::string& dir, const ExperimentConfig& cfg, const CommandOptions& opt = {});

}  // namespace dips
