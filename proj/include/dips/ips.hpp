#pragma once

// Interacting particle system (multilevel splitting).
//
// A model exposes first-passage simulation of one stochastic instance:
//
//   State spawn(StreamKey) const;          fresh particle
//   bool advance(State&, double level) const;
//                                          run until distance <= level (true)
//                                          or the run terminates (false)
//   double distance(const State&) const;   running minimum distance
//   void rebranch(State&, StreamKey) const;
//                                          future noise comes from a new key
//
// A surviving particle is stored at the instant of first passage, so that
// continuations from it restart the Markov process from that state.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "dips/errors.hpp"
#include "dips/parallel.hpp"
#include "dips/rng.hpp"

namespace dips {

template <class M>
concept SplittingModel = requires(const M& m, typename M::State& s, rng::StreamKey k, double level) {
    { m.spawn(k) } -> std::same_as<typename M::State>;
    { m.advance(s, level) } -> std::same_as<bool>;
    { m.distance(s) } -> std::convertible_to<double>;
    m.rebranch(s, k);
};

struct FiltrationSchedule {
    std::vector<double> thresholds;  // strictly decreasing, >= 0

    void validate() const;
    std::size_t size() const { return thresholds.size(); }
    double target() const { return thresholds.back(); }

    static FiltrationSchedule standard();  // 1000 ft down to 0 ft in 14 stages
};

struct StageResult {
    double threshold = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t survivors = 0;
    double rate = 0.0;
    double cumulative = 0.0;
};

struct IpsResult {
    std::vector<StageResult> stages;
    double probability = 0.0;
    bool extinct = false;
    std::size_t failing_stage = 0;      // 1-based; 0 when not extinct
    bool budget_exhausted = false;
    std::uint64_t nofc = 0;             // trajectory segments simulated
    double mean_distance = std::numeric_limits<double>::quiet_NaN();

    // Cumulative probability at each of `n` stages, zero past extinction.
    std::vector<double> cumulative(std::size_t n) const;
};

template <class State>
struct Particle {
    State state;
    double weight = 1.0;
    std::size_t stage = 0;
    std::size_t parent = 0;
};

// Multinomial draw of `s` parent indices out of `n`, equal weights.
std::vector<std::size_t> resample_indices(std::size_t n, std::size_t s, rng::Stream& stream);

// Resamples survivors back to `s` particles. Offspring j continues on
// stream key.child(j).
template <SplittingModel M>
std::vector<Particle<typename M::State>> resample(const M& model, const std::vector<Particle<typename M::State>>& survivors,
                                                  std::size_t s, rng::StreamKey key) {
    if (survivors.empty()) throw UsageError("resample: no survivors");
    rng::Stream stream(key.child(0xA11CEull));
    const auto parents = resample_indices(survivors.size(), s, stream);
    std::vector<Particle<typename M::State>> out;
    out.reserve(s);
    for (std::size_t j = 0; j < s; ++j) {
        auto p = survivors[parents[j]];
        p.parent = parents[j];
        model.rebranch(p.state, key.child(j));
        out.push_back(std::move(p));
    }
    return out;
}

struct FixedIpsOptions {
    // Run stage-1 particles to completion so that the mean final distance is
    // available; survivors are still snapshotted at first passage.
    bool full_first_stage = false;
    Execution execution = Execution::serial;
};

template <SplittingModel M>
IpsResult run_fixed_ips(const M& model, const FiltrationSchedule& schedule, std::size_t s, rng::StreamKey key,
                        const FixedIpsOptions& opt = {}) {
    using State = typename M::State;
    schedule.validate();
    if (s < 2) throw UsageError("ips: at least two particles per stage are required");
    IpsResult res;
    std::vector<Particle<State>> pool;
    double cumulative = 1.0;
    for (std::size_t l = 0; l < schedule.size(); ++l) {
        const double level = schedule.thresholds[l];
        std::vector<std::optional<State>> passed(s);
        std::vector<double> final_distance(s, 0.0);
        const rng::StreamKey stage_key = key.child({1, l});
        if (l > 0) pool = resample(model, pool, s, stage_key);
        for_each_index(opt.execution, s, [&](std::size_t j) {
            State st = l == 0 ? model.spawn(stage_key.child(j)) : pool[j].state;
            const bool hit = model.advance(st, level);
            if (l == 0 && opt.full_first_stage) {
                if (hit) passed[j] = st;
                model.advance(st, -std::numeric_limits<double>::infinity());
                final_distance[j] = model.distance(st);
            } else if (hit) {
                passed[j] = std::move(st);
            }
        });
        res.nofc += s;
        if (l == 0 && opt.full_first_stage) {
            double sum = 0.0;
            for (double d : final_distance) sum += d;
            res.mean_distance = sum / static_cast<double>(s);
        }
        std::vector<Particle<State>> survivors;
        for (std::size_t j = 0; j < s; ++j)
            if (passed[j]) survivors.push_back({std::move(*passed[j]), 1.0, l + 1, j});
        StageResult sr;
        sr.threshold = level;
        sr.trials = s;
        sr.survivors = survivors.size();
        sr.rate = static_cast<double>(sr.survivors) / static_cast<double>(s);
        cumulative *= sr.rate;
        sr.cumulative = cumulative;
        res.stages.push_back(sr);
        if (survivors.empty()) {
            res.extinct = true;
            res.failing_stage = l + 1;
            res.probability = 0.0;
            return res;
        }
        pool = std::move(survivors);
    }
    res.probability = cumulative;
    return res;
}

struct AdaptiveIpsConfig {
    double initial_threshold = 2500.0;
    double target = 0.0;
    std::size_t n_s = 100;                      // survivors per stage
    std::size_t max_failures = 1000;            // M_f consecutive failures
    double min_gap = 25.0;                      // delta_m
    double enlarge_factor = 1.5;                // stage-1 restart factor
    std::uint64_t max_trials_per_stage = 10'000'000;
    std::size_t max_restarts = 64;
    Execution execution = Execution::serial;

    void validate() const;
};

struct AdaptiveIpsResult : IpsResult {
    std::vector<double> thresholds;      // realised thresholds
    std::size_t restarts = 0;            // stage-1 enlargements
    std::size_t backtracks = 0;          // intermediate thresholds inserted
};

// Intermediate threshold between a passed level and a failing proposal.
double backtrack_threshold(double previous, double failing);

template <SplittingModel M>
AdaptiveIpsResult run_adaptive_ips(const M& model, const AdaptiveIpsConfig& cfg, rng::StreamKey key) {
    using State = typename M::State;
    cfg.validate();
    AdaptiveIpsResult res;
    std::vector<Particle<State>> pool;
    double cumulative = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    double proposal = cfg.initial_threshold;
    std::uint64_t attempt = 0;
    const std::size_t batch = std::max<std::size_t>(64, 8 * static_cast<std::size_t>(worker_count()));

    while (true) {
        const bool first = pool.empty();
        const rng::StreamKey akey = key.child({2, attempt++});
        const bool may_cancel = first || (previous - proposal) >= cfg.min_gap;
        std::vector<Particle<State>> survivors;
        std::uint64_t trials = 0;
        std::size_t streak = 0;
        bool cancelled = false;
        bool exhausted = false;

        while (survivors.size() < cfg.n_s && !cancelled && !exhausted) {
            std::vector<std::optional<State>> out(batch);
            std::vector<std::size_t> parent(batch, 0);
            const std::uint64_t base = trials;
            for_each_index(cfg.execution, batch, [&](std::size_t b) {
                const rng::StreamKey tkey = akey.child(base + b);
                State st;
                if (first) {
                    st = model.spawn(tkey);
                } else {
                    rng::Stream pick(tkey.child(0));
                    parent[b] = static_cast<std::size_t>(pick.below(pool.size()));
                    st = pool[parent[b]].state;
                    model.rebranch(st, tkey.child(1));
                }
                if (model.advance(st, proposal)) out[b] = std::move(st);
            });
            res.nofc += batch;
            // Consume the batch in trial order; results past the stopping
            // trial are discarded so that the outcome is batch-size independent.
            for (std::size_t b = 0; b < batch; ++b) {
                ++trials;
                if (out[b]) {
                    survivors.push_back({std::move(*out[b]), 1.0, res.stages.size() + 1, parent[b]});
                    streak = 0;
                    if (survivors.size() == cfg.n_s) break;
                } else if (++streak >= cfg.max_failures && may_cancel) {
                    cancelled = true;
                    break;
                }
                if (trials >= cfg.max_trials_per_stage) {
                    exhausted = true;
                    break;
                }
            }
        }

        if (cancelled) {
            if (first) {
                if (++res.restarts > cfg.max_restarts) {
                    res.budget_exhausted = true;
                    break;
                }
                proposal *= cfg.enlarge_factor;
            } else {
                proposal = backtrack_threshold(previous, proposal);
                ++res.backtracks;
            }
            continue;
        }
        if (exhausted && survivors.size() < cfg.n_s) {
            StageResult sr{proposal, trials, survivors.size(),
                           static_cast<double>(survivors.size()) / static_cast<double>(trials), 0.0};
            cumulative *= sr.rate;
            sr.cumulative = cumulative;
            res.stages.push_back(sr);
            res.thresholds.push_back(proposal);
            res.budget_exhausted = true;
            if (survivors.empty()) {
                res.extinct = true;
                res.failing_stage = res.stages.size();
            }
            break;
        }
        StageResult sr{proposal, trials, survivors.size(),
                       static_cast<double>(survivors.size()) / static_cast<double>(trials), 0.0};
        cumulative *= sr.rate;
        sr.cumulative = cumulative;
        res.stages.push_back(sr);
        res.thresholds.push_back(proposal);
        pool = std::move(survivors);
        previous = proposal;
        if (proposal <= cfg.target) break;
        proposal = cfg.target;
    }
    const bool reached = !res.stages.empty() && res.stages.back().threshold <= cfg.target &&
                         res.stages.back().survivors > 0;
    res.probability = reached ? cumulative : 0.0;
    return res;
}

}  // namespace dips
