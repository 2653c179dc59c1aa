#pragma once

// DIRECT (DIviding RECTangles) search-and-partition engine.
//
// The unit cube is split by trisection of potentially optimal boxes, as in
// Jones, Perttunen & Stuckman (1993). Two changes turn the optimiser into a
// probability estimator:
//
//  * skip rule: a selected box whose prior mass is below beta_skip times the
//    heaviest leaf is not divided; if every candidate is skipped, the box of
//    largest size with the smallest objective value is divided instead;
//  * stopping rule: stop once the running probability estimate p_k has
//    stayed within eps_M * p_k for q_stable consecutive evaluations.
//
// Box bounds are stored as integers in units of 3^-40 so that shared faces
// are bit-identical and neighbour tests are exact.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dips/objective.hpp"
#include "dips/param_space.hpp"

namespace dips {

inline constexpr int kMaxLevel = 40;

namespace detail {
struct PartitionAccess;
}

// What the evaluator reports for one centroid.
struct CentroidEval {
    double distance = 0.0;              // d(c), or mean distance for stochastic models
    double hit_ratio = 0.0;             // final-stage hit ratio
    std::vector<double> stage_ratios;   // cumulative per-stage hit ratios (may be empty)
    std::uint64_t nofc = 1;             // limit-state calls spent on this centroid
};

struct EvalRequest {
    std::uint64_t eval_index = 0;       // global evaluation number, keys the noise streams
    std::vector<double> unit_point;
    std::vector<double> physical_point;
};

// Evaluates a batch of centroids. Implementations may run the batch in
// parallel but must return results in request order.
using BatchEvaluator = std::function<std::vector<CentroidEval>(std::span<const EvalRequest>)>;

// Prior mass of a unit-cube box; normally ParameterSpace::unit_box_prior.
using UnitPrior = std::function<double(std::span<const double>, std::span<const double>)>;

struct Hyperbox {
    std::vector<std::uint64_t> lo;   // units of 3^-40
    std::vector<std::uint64_t> hi;
    std::vector<int> level;          // side length = 3^-level
    std::vector<double> center;      // unit-cube centroid
    int level_sum = 0;               // identifies the size class
    double size = 0.0;               // centre-to-vertex distance
    double value = 0.0;              // objective f at the centroid
    double distance = 0.0;
    double density = 0.0;            // g at the physical centroid
    double prior = 0.0;
    double hit_ratio = 0.0;
    std::vector<double> stage_ratios;
    std::size_t lineage = 0;         // centroid identifier
    std::size_t created = 0;         // creation order
    bool leaf = true;

    double unit_lo(std::size_t d) const;
    double unit_hi(std::size_t d) const;
    double volume() const;
};

struct StopConfig {
    std::size_t q_stable = 1000;
    double eps_M = 1e-9;
    std::size_t max_evals = 100000;
    double eps_hull = 1e-4;
    double beta_skip = 1e-6;
    bool use_stability_rule = true;

    void validate() const;
};

// How p_k is formed from the leaves.
struct EstimatorMode {
    enum class Kind { crisp, weighted } kind = Kind::crisp;
    double m = 0.0;          // crisp: hit if centroid distance <= m
    std::size_t stage = 0;   // weighted: index into stage_ratios (npos -> hit_ratio)

    static EstimatorMode crisp(double m) { return {Kind::crisp, m, 0}; }
    static EstimatorMode weighted_final() { return {Kind::weighted, 0.0, npos}; }
    static EstimatorMode weighted_stage(std::size_t l) { return {Kind::weighted, 0.0, l}; }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct SkipChoice {
    std::size_t id = 0;
    bool fallback = false;
};

// One division performed during a search; kept for auditing the skip rule.
struct DivisionRecord {
    std::size_t box = 0;
    double prior = 0.0;
    double max_leaf_prior = 0.0;
    bool fallback = false;
};

class Partition {
public:
    Partition(std::size_t dim, ObjectiveConfig objective, EstimatorMode mode);

    std::size_t dim() const { return dim_; }
    const std::vector<Hyperbox>& boxes() const { return boxes_; }
    const Hyperbox& box(std::size_t id) const { return boxes_.at(id); }
    std::vector<std::size_t> leaf_ids() const;  // ascending id order
    std::size_t leaf_count() const { return leaf_count_; }

    std::uint64_t eval_count() const { return eval_count_; }
    std::uint64_t nofc() const { return nofc_; }
    const std::vector<double>& probability_trace() const { return trace_; }
    const std::vector<DivisionRecord>& divisions() const { return divisions_; }
    const ObjectiveConfig& objective() const { return objective_; }
    const EstimatorMode& mode() const { return mode_; }

    double max_leaf_prior() const;
    double leaf_volume_sum() const;
    double leaf_prior_sum() const;
    double running_estimate() const { return running_; }

    // Leaves (excluding `self`) sharing a face or an edge with box `self`.
    std::vector<std::size_t> neighbors(std::size_t self) const;

    // Size classes ordered from largest box to smallest, each with its
    // leaves ordered by (value, creation).
    const std::map<int, std::set<std::pair<double, std::size_t>>>& size_classes() const { return classes_; }

    bool no_target_found() const { return no_target_; }
    bool stopped_by_stability() const { return stopped_stable_; }

    // Metadata carried into the partition file.
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<double> stage_thresholds;

private:
    friend struct detail::PartitionAccess;

    std::size_t add_box(Hyperbox b);
    void retire(std::size_t id);
    double contribution(const Hyperbox& b) const;
    void append_trace(std::size_t count);

    std::size_t dim_;
    ObjectiveConfig objective_;
    EstimatorMode mode_;
    std::vector<Hyperbox> boxes_;
    std::vector<LineageState> lineages_;
    std::map<int, std::set<std::pair<double, std::size_t>>> classes_;
    std::multiset<double> priors_;
    std::size_t leaf_count_ = 0;
    std::uint64_t eval_count_ = 0;
    std::uint64_t nofc_ = 0;
    double running_ = 0.0;
    std::vector<double> trace_;
    std::vector<DivisionRecord> divisions_;
    bool no_target_ = false;
    bool stopped_stable_ = false;
};

// One point per size class for the potential-optimality test.
struct HullPoint {
    double size = 0.0;
    double value = 0.0;
};

// Indices of points admitting a Lipschitz slope K > 0 under which they are
// best, with the eps_hull sufficient-improvement condition. Points must have
// distinct sizes.
std::vector<std::size_t> potentially_optimal_points(std::span<const HullPoint> points, double eps_hull);

// Partition holding only the root box, evaluated once.
Partition initialize_partition(std::size_t dim, const BatchEvaluator& evaluator, const UnitPrior& prior,
                               const ParameterSpace* space, const ObjectiveConfig& objective,
                               const EstimatorMode& mode);

// Potentially optimal leaves, largest size first.
std::vector<std::size_t> select_potentially_optimal(const Partition& partition, double eps_hull);

// First candidate whose prior reaches beta_skip times the heaviest leaf, or
// the largest-size/smallest-value leaf when every candidate falls short.
SkipChoice apply_skip_rule(std::span<const std::size_t> candidates, const Partition& partition, double beta_skip);

// Trisects leaf `id` along its longest sides. At most `budget` new centroids
// are evaluated; fewer longest sides are split when the budget is short.
// Returns the ids of the new leaves (side children first, centre last).
std::vector<std::size_t> divide(Partition& partition, std::size_t id, const BatchEvaluator& evaluator,
                                const UnitPrior& prior, const ParameterSpace* space = nullptr,
                                std::size_t budget = static_cast<std::size_t>(-1));

Partition run_search(const ParameterSpace& space, const BatchEvaluator& evaluator, const StopConfig& stop,
                     const ObjectiveConfig& objective, const EstimatorMode& mode, std::uint64_t seed = 0);

// Search on the bare unit cube; `prior` supplies box masses (e.g. volume).
Partition run_search_unit(std::size_t dim, const BatchEvaluator& evaluator, const UnitPrior& prior,
                          const StopConfig& stop, const ObjectiveConfig& objective, const EstimatorMode& mode,
                          std::uint64_t seed = 0);

double estimate_probability(const Partition& partition, const EstimatorMode& mode);

// Best objective value among all leaves and its centroid.
std::pair<double, std::vector<double>> best_point(const Partition& partition);

// Line-oriented text format, one leaf per line.
void write_partition(std::ostream& os, const Partition& partition, const ParameterSpace& space);
Partition read_partition(std::istream& is);

// Physical search bounds recorded in a partition file header.
struct PartitionHeader {
    std::vector<std::string> names;
    std::vector<double> search_lo, search_hi;
    std::vector<std::string> distributions;
};
PartitionHeader read_partition_header(std::istream& is);

}  // namespace dips
