#include "dips/ips.hpp"

#include <cmath>

namespace dips {

void FiltrationSchedule::validate() const {
    if (thresholds.empty()) throw UsageError("schedule: at least one threshold is required");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0) || !std::isfinite(thresholds[i]))
            throw UsageError("schedule: thresholds must be finite and >= 0");
        if (i > 0 && !(thresholds[i] < thresholds[i - 1]))
            throw UsageError("schedule: thresholds must be strictly decreasing");
    }
}

FiltrationSchedule FiltrationSchedule::standard() {
    return {{1000, 900, 800, 700, 600, 450, 300, 225, 150, 100, 75, 50, 25, 0}};
}

std::vector<double> IpsResult::cumulative(std::size_t n) const {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < stages.size() && i < n; ++i) out[i] = stages[i].cumulative;
    return out;
}

std::vector<std::size_t> resample_indices(std::size_t n, std::size_t s, rng::Stream& stream) {
    if (n == 0) throw UsageError("resample: no survivors");
    std::vector<std::size_t> idx(s);
    for (auto& i : idx) i = static_cast<std::size_t>(stream.below(n));
    return idx;
}

void AdaptiveIpsConfig::validate() const {
    if (!(initial_threshold > target)) throw UsageError("adaptive ips: initial threshold must exceed the target");
    if (!(target >= 0.0)) throw UsageError("adaptive ips: target must be >= 0");
    if (n_s < 1) throw UsageError("adaptive ips: n_s must be >= 1");
    if (max_failures < 1) throw UsageError("adaptive ips: M_f must be >= 1");
    if (!(min_gap > 0.0)) throw UsageError("adaptive ips: delta_m must be > 0");
    if (!(enlarge_factor > 1.0)) throw UsageError("adaptive ips: enlargement factor must be > 1");
    if (max_trials_per_stage < 1) throw UsageError("adaptive ips: trial budget must be >= 1");
}

double backtrack_threshold(double previous, double failing) {
    if (failing <= 0.0) return 0.5 * previous;
    return std::sqrt(previous * failing);
}

}  // namespace dips
