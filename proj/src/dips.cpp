#include "dips/dips.hpp"

#include "dips/errors.hpp"

namespace dips {

void DipsConfig::validate() const {
    if (s < 2) throw UsageError("dips: s must be >= 2");
    if (q < 1) throw UsageError("dips: q must be >= 1");
    schedule.validate();
    if (!(lambda > schedule.target())) throw UsageError("dips: lambda must exceed the target threshold");
}

void OuterMuConfig::validate() const {
    if (s < 1) throw UsageError("outer-mu: s must be >= 1");
    if (q < 1) throw UsageError("outer-mu: q must be >= 1");
    if (!(m >= 0.0)) throw UsageError("outer-mu: m must be >= 0");
    if (!(lambda > m)) throw UsageError("outer-mu: lambda must exceed m");
}

std::vector<double> stage_probabilities(const Partition& partition, std::size_t stages) {
    std::vector<double> p(stages);
    for (std::size_t l = 0; l < stages; ++l) p[l] = estimate_probability(partition, EstimatorMode::weighted_stage(l));
    return p;
}

}  // namespace dips
