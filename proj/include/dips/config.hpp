#pragma once

// Experiment configuration: an INI file with one section per concern.
// Keys carry their unit as a suffix (_ft, _s, _nm, _kt, _fps, _deg).
// Every problem found while loading is collected before reporting.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dips/errors.hpp"
#include "dips/ips.hpp"
#include "dips/param_space.hpp"
#include "dips/scenario.hpp"
#include "dips/stats.hpp"
#include "dips/uncertainty.hpp"

namespace dips {

enum class ModelKind { aircraft, gaussian_corner, linear, no_target, camel, sde_toy, gaussian_sweep, noisy_threshold };

std::string to_string(ModelKind m);

struct ParameterConfig {
    std::string name;
    std::string unit;
    StochasticParameter param;
};

struct ToyConfig {
    double corner = 4.5;          // gaussian_corner: a in {x_i >= a}
    double scale_ft = 100.0;
    double beta = 4.0;            // linear limit state
    double barrier = 7.4;         // sde_toy
    std::size_t steps = 50;
    double sweep_barrier = 6.0;   // gaussian_sweep
    double threshold = 3.719;     // noisy_threshold
};

struct AlgorithmConfig {
    std::size_t q = 16700;
    std::size_t s = 1000;
    std::size_t n_runs = 32;
    std::vector<double> schedule_ft = FiltrationSchedule::standard().thresholds;
    double lambda_ft = 10000.0;
    double m_ft = 0.0;
    StopConfig stop{};
    double ci_level = kDefaultConfidence;
    double tls = 1e-9;
    ExtrapolationConfig extrapolation{};
    AdaptiveIpsConfig adaptive{};
    std::vector<double> ips_point;   // physical point for estimate-ips; empty -> medians
};

struct UncertaintyConfig {
    std::vector<MomentPerturbation> perturbations;
    std::vector<MomentRange> ranges;
    double sensitivity_step = 0.01;
    double escaped_warning = kEscapedMassWarning;
};

struct OutputConfig {
    std::string directory = "out";
    bool svg = false;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ModelKind model = ModelKind::aircraft;
    std::uint64_t seed = 1;
    int workers = 0;   // 0 -> OpenMP default
    Scenario scenario = Scenario::reference();
    bool turbulence = false;
    ToyConfig toy{};
    std::vector<ParameterConfig> parameters;
    AlgorithmConfig algorithm{};
    UncertaintyConfig uncertainty{};
    OutputConfig output{};
    std::string hash;   // FNV-1a of the file bytes, hex

    ParameterSpace space() const;
    std::vector<std::string> parameter_names() const;
    std::vector<double> nominal_point() const;   // ips_point or the medians
};

// Thrown with every validation problem, one per line of what().
class ConfigValidationError : public ConfigError {
public:
    explicit ConfigValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace dips
