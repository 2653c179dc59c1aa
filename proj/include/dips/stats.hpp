#pragma once

// Post-processing of repeated probability estimates.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dips/param_space.hpp"
#include "dips/parallel.hpp"
#include "dips/rng.hpp"

namespace dips {

inline constexpr double kDefaultConfidence = 0.99;

// Two-sided Student quantile t_{(1+level)/2, dof}.
double student_t_quantile(double level, double dof);

struct LogSummary {
    std::size_t n = 0;
    double log_mean = 0.0;       // mean of ln P
    double log_sd = 0.0;         // sample standard deviation of ln P
    double sample_mean = 0.0;    // arithmetic mean of P
    double lognormal_mean = 0.0; // exp(log_mean + log_sd^2 / 2)
    double skewness = 0.0;       // sample skewness of P
};

LogSummary summarize(std::span<const double> values);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

// exp(p + s^2/2 -/+ t sqrt(s^2/N + s^4/(2(N-1)))) over p = ln P.
Interval log_ci(std::span<const double> values, double level = kDefaultConfidence);

// t sqrt(s^2/N + s^4/(2(N-1))).
double dispersion(std::span<const double> values, double level = kDefaultConfidence);

// Running minimum in stage order, capped at 1.
std::vector<double> clamp_quantiles(std::span<const double> upper, std::span<const double> thresholds);

// Lower limits are flagged when the sample skewness exceeds this.
inline constexpr double kSkewnessFlag = 2.0;

// beta = Phi^{-1}(1 - rho); empty for rho outside (0, 1).
std::optional<double> reliability_index(double rho);
double probability_from_index(double beta);

struct WelchResult {
    double T = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

// Unequal-variance two-sample t-test on ln values, two-sided; T > 0 when a
// has the larger log mean.
WelchResult compare_runs(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

enum class FitForm { asymptotic, linear };

struct ExtrapolationConfig {
    std::vector<double> k_grid{0.25, 0.33, 0.5, 0.75, 1.0};
    std::size_t samples_per_k = 100000;
    double m = 0.0;          // hit if d <= m
    FitForm form = FitForm::asymptotic;
    Execution execution = Execution::serial;

    void validate() const;
};

struct ExtrapolationPoint {
    double k = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t samples = 0;
    double rho = 0.0;
    std::optional<double> beta;
};

struct ExtrapolationResult {
    std::vector<ExtrapolationPoint> points;
    double A = 0.0;
    double B = 0.0;
    double beta1 = 0.0;
    double probability = 0.0;
    double residual_rms = 0.0;
    std::uint64_t nofc = 0;
};

// beta(k) = A k + B / k (or A k) by least squares over usable points.
void fit_extrapolation(ExtrapolationResult& r, FitForm form);

using LimitState = std::function<double(std::span<const double> x, rng::StreamKey key)>;

ExtrapolationResult run_extrapolation(const LimitState& limit_state, const ParameterSpace& space,
                                      const ExtrapolationConfig& cfg, std::uint64_t seed, std::uint64_t run = 0);

}  // namespace dips
