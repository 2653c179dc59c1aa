#include "dips/objective.hpp"

#include <cmath>
#include <numeric>

#include "dips/errors.hpp"

namespace dips {

std::string to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::inner: return "inner";
        case ObjectiveKind::outer: return "outer";
        case ObjectiveKind::mean_crude: return "mean_crude";
        case ObjectiveKind::plain: return "plain";
    }
    return "?";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
    if (s == "inner") return ObjectiveKind::inner;
    if (s == "outer") return ObjectiveKind::outer;
    if (s == "mean_crude") return ObjectiveKind::mean_crude;
    if (s == "plain") return ObjectiveKind::plain;
    throw UsageError("unknown objective '" + s + "'");
}

void ObjectiveConfig::validate() const {
    if (!(m >= 0.0)) throw UsageError("objective: m must be >= 0");
    if (kind == ObjectiveKind::outer && !(lambda > m)) throw UsageError("objective: lambda must exceed m");
    if (s < 1) throw UsageError("objective: s must be >= 1");
}

double inner_objective(double distance, double density, double m) {
    return distance > m ? distance : -density;
}

double outer_objective(LineageState& lineage, OuterStep step, std::span<const double> neighbor_ratios,
                       const ObjectiveConfig& cfg) {
    if (step == OuterStep::refine && lineage.depth == 0)
        throw UsageError("outer objective: lineage refined before its first evaluation");
    if (step == OuterStep::first && lineage.depth != 0)
        throw UsageError("outer objective: lineage already started");
    ++lineage.depth;
    if (lineage.base_ratio == 0.0) {
        lineage.accumulated = lineage.base_distance;
        return lineage.accumulated;
    }
    if (step == OuterStep::first) {
        lineage.accumulated = lineage.base_distance + cfg.lambda * lineage.base_ratio;
    } else {
        const double vicinity = std::accumulate(neighbor_ratios.begin(), neighbor_ratios.end(), 0.0);
        lineage.accumulated += cfg.lambda * vicinity;
    }
    return lineage.accumulated;
}

double mean_distance(std::span<const double> distances) {
    if (distances.empty()) throw UsageError("mean_distance: no instances");
    return std::accumulate(distances.begin(), distances.end(), 0.0) / static_cast<double>(distances.size());
}

double hit_ratio(std::span<const double> distances, double m) {
    if (distances.empty()) throw UsageError("hit_ratio: no instances");
    std::size_t hits = 0;
    for (double d : distances) hits += d <= m ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(distances.size());
}

}  // namespace dips
