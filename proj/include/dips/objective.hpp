#pragma once

// Objective functions steering the search-and-partition engine.
//
//   inner:      f = d            if d > m
//               f = -g(x)        if d <= m   (refines toward dense target points)
//   outer:      f = lineage value built from the mean distance and the hit
//               ratios in the vicinity of the box (refines the slopes that
//               surround regions of high hit ratio)
//   mean_crude: f = mean distance
//   plain:      f = value returned by the evaluator (pure optimisation)

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dips/parallel.hpp"
#include "dips/rng.hpp"

namespace dips {

enum class ObjectiveKind { inner, outer, mean_crude, plain };

std::string to_string(ObjectiveKind k);
ObjectiveKind objective_kind_from_string(const std::string& s);

struct ObjectiveConfig {
    ObjectiveKind kind = ObjectiveKind::inner;
    double m = 0.0;            // target threshold distance (ft)
    double lambda = 10000.0;   // vicinity scaling (ft)
    std::size_t s = 1;         // instances per centroid

    void validate() const;
};

double inner_objective(double distance, double density, double m);

// Per-centroid accumulator of the outer objective.
struct LineageState {
    std::size_t id = 0;
    double base_distance = 0.0;  // mean distance at the centroid
    double base_ratio = 0.0;     // hit ratio at the centroid
    double accumulated = 0.0;    // current value of the recursion
    std::size_t depth = 0;       // 0 until the first value has been produced
};

enum class OuterStep {
    first,   // box created around a fresh centroid
    refine,  // a smaller box re-centred on an existing centroid
};

// Advances the lineage and returns the new objective value. Refinement
// requires a prior `first` step.
double outer_objective(LineageState& lineage, OuterStep step, std::span<const double> neighbor_ratios,
                       const ObjectiveConfig& cfg);

// Crude Monte Carlo over `s` stochastic instances at one parameter point.
// `sample(j, key)` returns the miss distance of instance j driven by stream
// `key`; instance keys are children of `base`, so results do not depend on
// the execution policy.
template <class SampleFn>
std::vector<double> sample_distances(SampleFn&& sample, std::size_t s, rng::StreamKey base,
                                     Execution ex = Execution::serial) {
    std::vector<double> out(s);
    for_each_index(ex, s, [&](std::size_t j) { out[j] = sample(j, base.child(j)); });
    return out;
}

double mean_distance(std::span<const double> distances);
double hit_ratio(std::span<const double> distances, double m);

template <class SampleFn>
double mean_distance(SampleFn&& sample, std::size_t s, rng::StreamKey base, Execution ex = Execution::serial) {
    const auto d = sample_distances(sample, s, base, ex);
    return mean_distance(d);
}

template <class SampleFn>
double hit_ratio(SampleFn&& sample, double m, std::size_t s, rng::StreamKey base,
                 Execution ex = Execution::serial) {
    const auto d = sample_distances(sample, s, base, ex);
    return hit_ratio(d, m);
}

}  // namespace dips
