#pragma once

// Reuse of a finished partition under perturbed input moments. Leaf priors
// are recomputed over the same physical bounds; the stored hit ratios are
// reused, so no limit-state evaluation takes place.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dips/direct.hpp"
#include "dips/param_space.hpp"

namespace dips {

struct MomentPerturbation {
    enum class Kind { absolute, relative };

    std::string parameter;
    Moment moment = Moment::mean;
    Kind kind = Kind::absolute;
    double value = 0.0;  // new value, or fractional delta for relative

    double apply(double current) const;
};

MomentPerturbation parse_perturbation(const std::string& text);  // "name.mean=+10%" or "name.stddev=3.5"

ParameterSpace perturbed_space(const ParameterSpace& space, std::span<const MomentPerturbation> perturbations);

// Parameter space recorded in a partition file header.
ParameterSpace space_from_header(const PartitionHeader& header);

inline constexpr double kEscapedMassWarning = 1e-3;

struct ReweightResult {
    std::vector<double> stage_probabilities;
    double domain_prior = 0.0;   // perturbed prior mass of the search box
    double escaped_mass = 0.0;   // perturbed mass outside the box
    bool escaped_warning = false;
    std::string warning;
};

// Stage probabilities of `partition` for the leaves' stage ratios, or for the
// partition's own estimator mode when the leaves carry no stage ratios.
std::vector<double> partition_probabilities(const Partition& partition);

ReweightResult reweight(const Partition& partition, const ParameterSpace& space,
                        std::span<const MomentPerturbation> perturbations,
                        double warn_relative = kEscapedMassWarning);

struct SensitivityRate {
    std::string parameter;
    Moment moment = Moment::mean;
    double step = 0.0;             // absolute moment step
    double rate = 0.0;             // d log P / d moment, final stage
    std::vector<double> p_plus;
    std::vector<double> p_minus;
};

struct SensitivityTarget {
    std::string parameter;
    Moment moment = Moment::mean;
};

// Central differences of log P at +-step, step = relative_step * scale where
// the scale is sigma (normal) or the mean (exponential). Sorted by |rate|.
std::vector<SensitivityRate> sensitivity(const Partition& partition, const ParameterSpace& space,
                                         std::span<const SensitivityTarget> targets, double relative_step = 0.01);

// Every moment of every parameter.
std::vector<SensitivityTarget> all_moments(const ParameterSpace& space);

struct CornerCase {
    std::vector<MomentPerturbation> perturbations;
    ReweightResult result;
};

struct MomentRange {
    std::string parameter;
    Moment moment = Moment::mean;
    double lo = 0.0;
    double hi = 0.0;
};

// Reweights every combination of range extremes; returns them ordered by
// final-stage probability, lowest first.
std::vector<CornerCase> corner_search(const Partition& partition, const ParameterSpace& space,
                                      std::span<const MomentRange> ranges);

enum class Verdict { pass, fail, indeterminate };
std::string to_string(Verdict v);
std::string to_string(Moment m);

Verdict tls_verdict(double lower, double upper, double tls);

}  // namespace dips
