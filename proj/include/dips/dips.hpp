#pragma once

// Combined estimator: DIRECT partitions the parameter space and an IPS run
// at each new centroid supplies per-stage hit ratios; leaf priors weight the
// ratios into per-stage probabilities. Also the crude-MC variant (Outer-mu)
// and the basic crisp estimator.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dips/direct.hpp"
#include "dips/ips.hpp"
#include "dips/param_space.hpp"
#include "dips/stats.hpp"

namespace dips {

struct DipsConfig {
    std::size_t s = 1000;          // particles per hyperbox
    std::size_t q = 16700;         // centroid evaluations
    FiltrationSchedule schedule = FiltrationSchedule::standard();
    double lambda = 10000.0;
    StopConfig stop{};             // max_evals is overridden by q
    Execution execution = Execution::serial;

    void validate() const;
};

struct EstimateRun {
    std::vector<double> thresholds;
    std::vector<double> stage_probabilities;  // P(m_l)
    Partition partition;
    bool no_target = false;
    std::uint64_t nofc = 0;
};

// Evaluates centroids with an in-box IPS launched at the centroid.
template <class Factory>
BatchEvaluator ips_evaluator(Factory factory, const FiltrationSchedule& schedule, std::size_t s, rng::StreamKey key,
                             Execution ex) {
    return [factory, schedule, s, key, ex](std::span<const EvalRequest> reqs) {
        std::vector<CentroidEval> out(reqs.size());
        for_each_index(ex, reqs.size(), [&](std::size_t i) {
            const auto model = factory(reqs[i].physical_point);
            FixedIpsOptions opt;
            opt.full_first_stage = true;
            const auto r = run_fixed_ips(model, schedule, s, key.child(reqs[i].eval_index), opt);
            auto& ce = out[i];
            ce.distance = r.mean_distance;
            ce.stage_ratios = r.cumulative(schedule.size());
            ce.hit_ratio = ce.stage_ratios.back();
            ce.nofc = r.nofc;
        });
        return out;
    };
}

// Evaluates centroids by `s` complete runs: mean distance and hit ratio at m.
template <class Factory>
BatchEvaluator crude_evaluator(Factory factory, std::size_t s, double m, rng::StreamKey key, Execution ex) {
    return [factory, s, m, key, ex](std::span<const EvalRequest> reqs) {
        std::vector<CentroidEval> out(reqs.size());
        for_each_index(ex, reqs.size(), [&](std::size_t i) {
            const auto model = factory(reqs[i].physical_point);
            const auto base = key.child(reqs[i].eval_index);
            double sum = 0.0;
            std::size_t hits = 0;
            for (std::size_t j = 0; j < s; ++j) {
                auto st = model.spawn(base.child(j));
                model.advance(st, -std::numeric_limits<double>::infinity());
                const double d = model.distance(st);
                sum += d;
                hits += d <= m ? 1 : 0;
            }
            auto& ce = out[i];
            ce.distance = sum / static_cast<double>(s);
            ce.hit_ratio = static_cast<double>(hits) / static_cast<double>(s);
            ce.stage_ratios = {ce.hit_ratio};
            ce.nofc = s;
        });
        return out;
    };
}

std::vector<double> stage_probabilities(const Partition& partition, std::size_t stages);

template <class Factory>
EstimateRun run_dips(const ParameterSpace& space, Factory factory, const DipsConfig& cfg, std::uint64_t seed,
                     std::uint64_t run = 0) {
    cfg.validate();
    StopConfig stop = cfg.stop;
    stop.max_evals = cfg.q;
    ObjectiveConfig obj{ObjectiveKind::outer, cfg.schedule.target(), cfg.lambda, cfg.s};
    const auto key = rng::domain_key(seed, rng::Domain::particles, run);
    auto ev = ips_evaluator(factory, cfg.schedule, cfg.s, key, cfg.execution);
    EstimateRun r{cfg.schedule.thresholds, {},
                  run_search(space, ev, stop, obj, EstimatorMode::weighted_final(), seed), false, 0};
    r.partition.stage_thresholds = cfg.schedule.thresholds;
    r.stage_probabilities = stage_probabilities(r.partition, cfg.schedule.size());
    r.no_target = r.stage_probabilities.back() == 0.0;
    r.nofc = r.partition.nofc();
    return r;
}

struct OuterMuConfig {
    std::size_t s = 100;
    std::size_t q = 250000;
    double m = 0.0;
    double lambda = 10000.0;
    StopConfig stop{};
    Execution execution = Execution::serial;

    void validate() const;
};

template <class Factory>
EstimateRun run_outer_mu(const ParameterSpace& space, Factory factory, const OuterMuConfig& cfg, std::uint64_t seed,
                         std::uint64_t run = 0) {
    cfg.validate();
    StopConfig stop = cfg.stop;
    stop.max_evals = cfg.q;
    ObjectiveConfig obj{ObjectiveKind::outer, cfg.m, cfg.lambda, cfg.s};
    const auto key = rng::domain_key(seed, rng::Domain::crude, run);
    auto ev = crude_evaluator(factory, cfg.s, cfg.m, key, cfg.execution);
    EstimateRun r{{cfg.m}, {}, run_search(space, ev, stop, obj, EstimatorMode::weighted_final(), seed), false, 0};
    r.partition.stage_thresholds = {cfg.m};
    r.stage_probabilities = {estimate_probability(r.partition, EstimatorMode::weighted_final())};
    r.no_target = r.stage_probabilities.back() == 0.0;
    r.nofc = r.partition.nofc();
    return r;
}

struct BasicConfig {
    double m = 0.0;
    StopConfig stop{};
    Execution execution = Execution::serial;
};

// Crisp estimator with the Inner objective; one run per centroid.
template <class Factory>
EstimateRun run_basic(const ParameterSpace& space, Factory factory, const BasicConfig& cfg, std::uint64_t seed,
                      std::uint64_t run = 0) {
    ObjectiveConfig obj{ObjectiveKind::inner, cfg.m, 10000.0, 1};
    obj.lambda = std::max(obj.lambda, 2.0 * cfg.m + 1.0);
    const auto key = rng::domain_key(seed, rng::Domain::search, run);
    auto ev = crude_evaluator(factory, 1, cfg.m, key, cfg.execution);
    EstimateRun r{{cfg.m}, {}, run_search(space, ev, cfg.stop, obj, EstimatorMode::crisp(cfg.m), seed), false, 0};
    r.partition.stage_thresholds = {cfg.m};
    r.stage_probabilities = {estimate_probability(r.partition, EstimatorMode::crisp(cfg.m))};
    r.no_target = r.stage_probabilities.back() == 0.0;
    r.nofc = r.partition.nofc();
    return r;
}

}  // namespace dips
