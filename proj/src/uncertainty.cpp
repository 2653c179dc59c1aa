#include "dips/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <sstream>

#include "dips/errors.hpp"

namespace dips {

double MomentPerturbation::apply(double current) const {
    return kind == Kind::absolute ? value : current * (1.0 + value);
}

namespace {

Moment parse_moment(const std::string& s) {
    if (s == "mean") return Moment::mean;
    if (s == "stddev" || s == "sigma") return Moment::stddev;
    throw UsageError("unknown moment '" + s + "'");
}

double moment_scale(const Distribution& d) {
    return d.is_normal() ? std::get<Normal>(d.law()).sigma : std::get<Exponential>(d.law()).mean;
}

}  // namespace

MomentPerturbation parse_perturbation(const std::string& text) {
    static const std::regex re(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\.(mean|stddev|sigma)\s*=\s*([-+0-9.eE]+)\s*(%?)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw UsageError("malformed perturbation '" + text + "'");
    MomentPerturbation p;
    p.parameter = m[1];
    p.moment = parse_moment(m[2]);
    const double v = std::stod(m[3]);
    if (m[4] == "%") {
        p.kind = MomentPerturbation::Kind::relative;
        p.value = v / 100.0;
    } else {
        p.value = v;
    }
    return p;
}

ParameterSpace perturbed_space(const ParameterSpace& space, std::span<const MomentPerturbation> perturbations) {
    ParameterSpace out = space;
    for (const auto& p : perturbations) {
        const auto idx = out.index_of(p.parameter);
        if (idx < 0) throw UsageError("perturbation of unknown parameter '" + p.parameter + "'");
        const auto d = static_cast<std::size_t>(idx);
        const auto& dist = out[d].dist;
        const double v = p.apply(dist.moment(p.moment));
        out = out.with_distribution(d, dist.with_moment(p.moment, v));
    }
    return out;
}

ParameterSpace space_from_header(const PartitionHeader& header) {
    static const std::regex normal(R"(^normal\(([^,]+),([^)]+)\)$)");
    static const std::regex expo(R"(^exponential\(([^)]+)\)$)");
    std::vector<StochasticParameter> params;
    for (std::size_t i = 0; i < header.names.size(); ++i) {
        std::smatch m;
        const auto& text = header.distributions[i];
        if (std::regex_match(text, m, normal)) {
            params.push_back(StochasticParameter::bounded(header.names[i], Normal{std::stod(m[1]), std::stod(m[2])},
                                                          header.search_lo[i], header.search_hi[i]));
        } else if (std::regex_match(text, m, expo)) {
            params.push_back(StochasticParameter::bounded(header.names[i], Exponential{std::stod(m[1])},
                                                          header.search_lo[i], header.search_hi[i]));
        } else {
            throw UsageError("unrecognized distribution '" + text + "' in partition header");
        }
    }
    return ParameterSpace(std::move(params));
}

namespace {

std::size_t stage_count(const Partition& partition) {
    for (const auto& b : partition.boxes())
        if (b.leaf) return b.stage_ratios.size();
    return 0;
}

// Same summation order as estimate_probability, with priors from `prior`.
template <class PriorOf>
std::vector<double> sum_stages(const Partition& partition, PriorOf prior) {
    const std::size_t stages = stage_count(partition);
    const auto& mode = partition.mode();
    std::vector<double> p(std::max<std::size_t>(stages, 1), 0.0);
    for (const auto& b : partition.boxes()) {
        if (!b.leaf) continue;
        const double w = prior(b);
        if (stages == 0) {
            if (mode.kind == EstimatorMode::Kind::crisp) {
                if (b.distance <= mode.m) p[0] += w;
            } else {
                p[0] += w * b.hit_ratio;
            }
            continue;
        }
        if (b.stage_ratios.size() != stages) throw UsageError("reweight: leaves disagree on stage count");
        for (std::size_t l = 0; l < stages; ++l) p[l] += w * b.stage_ratios[l];
    }
    return p;
}

}  // namespace

std::vector<double> partition_probabilities(const Partition& partition) {
    return sum_stages(partition, [](const Hyperbox& b) { return b.prior; });
}

ReweightResult reweight(const Partition& partition, const ParameterSpace& space,
                        std::span<const MomentPerturbation> perturbations, double warn_relative) {
    if (space.dim() != partition.dim()) throw UsageError("reweight: dimension mismatch");
    const ParameterSpace pert = perturbed_space(space, perturbations);
    std::vector<double> lo(space.dim()), hi(space.dim());
    ReweightResult r;
    r.stage_probabilities = sum_stages(partition, [&](const Hyperbox& b) {
        for (std::size_t d = 0; d < lo.size(); ++d) {
            lo[d] = b.unit_lo(d);
            hi[d] = b.unit_hi(d);
        }
        return pert.unit_box_prior(lo, hi);
    });
    r.domain_prior = pert.domain_prior();
    // Mass the perturbation pushes out of the box beyond what was already
    // outside; the stored partition cannot see it.
    const double before = 1.0 - space.domain_prior();
    r.escaped_mass = std::max(0.0, (1.0 - r.domain_prior) - before);
    const double p = r.stage_probabilities.back();
    if (r.escaped_mass > warn_relative * p && r.escaped_mass > 0.0) {
        r.escaped_warning = true;
        std::ostringstream os;
        os << "perturbation moves " << r.escaped_mass << " of prior mass outside the search bounds (P = " << p
           << ")";
        r.warning = os.str();
    }
    return r;
}

std::vector<SensitivityTarget> all_moments(const ParameterSpace& space) {
    std::vector<SensitivityTarget> t;
    for (const auto& prm : space.params()) {
        t.push_back({prm.name, Moment::mean});
        if (prm.dist.is_normal()) t.push_back({prm.name, Moment::stddev});
    }
    return t;
}

std::vector<SensitivityRate> sensitivity(const Partition& partition, const ParameterSpace& space,
                                         std::span<const SensitivityTarget> targets, double relative_step) {
    if (!(relative_step > 0.0)) throw UsageError("sensitivity: step must be > 0");
    std::vector<SensitivityRate> out;
    for (const auto& t : targets) {
        const auto idx = space.index_of(t.parameter);
        if (idx < 0) throw UsageError("sensitivity: unknown parameter '" + t.parameter + "'");
        const auto& dist = space[static_cast<std::size_t>(idx)].dist;
        const double h = relative_step * moment_scale(dist);
        const double m0 = dist.moment(t.moment);
        const MomentPerturbation up{t.parameter, t.moment, MomentPerturbation::Kind::absolute, m0 + h};
        const MomentPerturbation dn{t.parameter, t.moment, MomentPerturbation::Kind::absolute, m0 - h};
        SensitivityRate s{t.parameter, t.moment, h, 0.0, {}, {}};
        s.p_plus = reweight(partition, space, std::span(&up, 1)).stage_probabilities;
        s.p_minus = reweight(partition, space, std::span(&dn, 1)).stage_probabilities;
        const double a = s.p_plus.back(), b = s.p_minus.back();
        if (a > 0.0 && b > 0.0) s.rate = (std::log(a) - std::log(b)) / (2.0 * h);
        else if (a != b) s.rate = std::copysign(std::numeric_limits<double>::infinity(), a - b);
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SensitivityRate& x, const SensitivityRate& y) { return std::abs(x.rate) > std::abs(y.rate); });
    return out;
}

std::vector<CornerCase> corner_search(const Partition& partition, const ParameterSpace& space,
                                      std::span<const MomentRange> ranges) {
    if (ranges.size() > 20) throw UsageError("corner_search: too many ranges");
    std::vector<CornerCase> out;
    const std::size_t n = std::size_t{1} << ranges.size();
    for (std::size_t mask = 0; mask < n; ++mask) {
        CornerCase c;
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const auto& r = ranges[i];
            c.perturbations.push_back({r.parameter, r.moment, MomentPerturbation::Kind::absolute,
                                       (mask >> i) & 1 ? r.hi : r.lo});
        }
        c.result = reweight(partition, space, c.perturbations);
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const CornerCase& a, const CornerCase& b) {
        return a.result.stage_probabilities.back() < b.result.stage_probabilities.back();
    });
    return out;
}

std::string to_string(Moment m) { return m == Moment::mean ? "mean" : "stddev"; }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "Pass";
        case Verdict::fail: return "Fail";
        case Verdict::indeterminate: return "Indeterminate";
    }
    return "?";
}

Verdict tls_verdict(double lower, double upper, double tls) {
    if (!(lower <= upper)) throw UsageError("tls_verdict: lower > upper");
    if (upper < tls) return Verdict::pass;
    if (lower > tls) return Verdict::fail;
    return Verdict::indeterminate;
}

}  // namespace dips
