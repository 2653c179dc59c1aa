#include "dips/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "dips/errors.hpp"

namespace dips {

double student_t_quantile(double level, double dof) {
    if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must lie in (0, 1)");
    if (!(dof > 0.0)) throw UsageError("degrees of freedom must be > 0");
    boost::math::students_t dist(dof);
    return boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - level)));
}

LogSummary summarize(std::span<const double> values) {
    if (values.size() < 2) throw UsageError("statistics need at least two values");
    for (double v : values)
        if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("statistics need positive finite values");
    LogSummary s;
    s.n = values.size();
    const double n = static_cast<double>(s.n);
    double sum_log = 0.0, sum = 0.0;
    for (double v : values) {
        sum_log += std::log(v);
        sum += v;
    }
    s.log_mean = sum_log / n;
    s.sample_mean = sum / n;
    double ss = 0.0, m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = std::log(v) - s.log_mean;
        ss += d * d;
        const double e = v - s.sample_mean;
        m2 += e * e;
        m3 += e * e * e;
    }
    s.log_sd = std::sqrt(ss / (n - 1.0));
    s.lognormal_mean = std::exp(s.log_mean + 0.5 * s.log_sd * s.log_sd);
    m2 /= n;
    m3 /= n;
    s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return s;
}

namespace {

double half_width(const LogSummary& s, double level) {
    const double n = static_cast<double>(s.n);
    const double v = s.log_sd * s.log_sd;
    return student_t_quantile(level, n - 1.0) * std::sqrt(v / n + v * v / (2.0 * (n - 1.0)));
}

}  // namespace

Interval log_ci(std::span<const double> values, double level) {
    const auto s = summarize(values);
    const double centre = s.log_mean + 0.5 * s.log_sd * s.log_sd;
    const double h = half_width(s, level);
    return {std::exp(centre - h), std::exp(centre + h)};
}

double dispersion(std::span<const double> values, double level) { return half_width(summarize(values), level); }

std::vector<double> clamp_quantiles(std::span<const double> upper, std::span<const double> thresholds) {
    if (upper.size() != thresholds.size()) throw UsageError("clamp_quantiles: size mismatch");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i] < thresholds[i - 1])) throw UsageError("clamp_quantiles: thresholds must decrease");
    std::vector<double> out(upper.begin(), upper.end());
    double running = 1.0;
    for (auto& v : out) {
        running = std::min(running, v);
        v = running;
    }
    return out;
}

std::optional<double> reliability_index(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) return std::nullopt;
    return std_normal_quantile_upper(rho);
}

double probability_from_index(double beta) { return std_normal_sf(beta); }

WelchResult compare_runs(std::span<const double> a, std::span<const double> b, double alpha) {
    const auto sa = summarize(a);
    const auto sb = summarize(b);
    const double na = static_cast<double>(sa.n), nb = static_cast<double>(sb.n);
    const double va = sa.log_sd * sa.log_sd / na;
    const double vb = sb.log_sd * sb.log_sd / nb;
    WelchResult r;
    const double diff = sa.log_mean - sb.log_mean;
    if (va + vb == 0.0) {
        r.T = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
        r.dof = na + nb - 2.0;
        r.p_value = diff == 0.0 ? 1.0 : 0.0;
    } else {
        r.T = diff / std::sqrt(va + vb);
        r.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
        boost::math::students_t dist(r.dof);
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.T)));
    }
    r.reject = r.p_value < alpha;
    return r;
}

void ExtrapolationConfig::validate() const {
    if (k_grid.size() < 2) throw UsageError("extrapolation: the k grid needs at least two points");
    for (double k : k_grid)
        if (!(k > 0.0)) throw UsageError("extrapolation: k values must be > 0");
    if (samples_per_k < 1) throw UsageError("extrapolation: samples_per_k must be >= 1");
}

void fit_extrapolation(ExtrapolationResult& r, FitForm form) {
    std::vector<const ExtrapolationPoint*> use;
    for (const auto& p : r.points)
        if (p.beta) use.push_back(&p);
    const std::size_t need = form == FitForm::asymptotic ? 2 : 1;
    if (use.size() < std::max<std::size_t>(need, 2))
        throw std::runtime_error("extrapolation: fewer than two usable points");
    if (form == FitForm::linear) {
        double num = 0.0, den = 0.0;
        for (auto* p : use) {
            num += p->k * *p->beta;
            den += p->k * p->k;
        }
        r.A = num / den;
        r.B = 0.0;
    } else {
        // Normal equations for columns (k, 1/k).
        double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
        for (auto* p : use) {
            const double u = p->k, w = 1.0 / p->k, y = *p->beta;
            s11 += u * u;
            s12 += u * w;
            s22 += w * w;
            t1 += u * y;
            t2 += w * y;
        }
        const double det = s11 * s22 - s12 * s12;
        if (std::abs(det) < 1e-12 * s11 * s22) throw std::runtime_error("extrapolation: singular fit");
        r.A = (t1 * s22 - t2 * s12) / det;
        r.B = (s11 * t2 - s12 * t1) / det;
    }
    double ss = 0.0;
    for (auto* p : use) {
        const double e = *p->beta - (r.A * p->k + r.B / p->k);
        ss += e * e;
    }
    r.residual_rms = std::sqrt(ss / static_cast<double>(use.size()));
    r.beta1 = r.A + r.B;
    r.probability = probability_from_index(r.beta1);
}

ExtrapolationResult run_extrapolation(const LimitState& limit_state, const ParameterSpace& space,
                                      const ExtrapolationConfig& cfg, std::uint64_t seed, std::uint64_t run) {
    cfg.validate();
    const auto base = rng::domain_key(seed, rng::Domain::extrapolation, run);
    ExtrapolationResult r;
    const std::size_t n = space.dim();
    for (std::size_t ki = 0; ki < cfg.k_grid.size(); ++ki) {
        const double k = cfg.k_grid[ki];
        const auto kkey = base.child(ki);
        std::vector<unsigned char> hit(cfg.samples_per_k, 0);
        for_each_index(cfg.execution, cfg.samples_per_k, [&](std::size_t i) {
            const auto skey = kkey.child(i);
            std::vector<double> g(n);
            for (std::size_t d = 0; d < n; d += 2) {
                const auto pair = rng::normal_pair(skey, d / 2, 0);
                g[d] = pair[0];
                if (d + 1 < n) g[d + 1] = pair[1];
            }
            const auto x = space.iso_normal_sample(k, g);
            hit[i] = limit_state(x, skey.child(1)) <= cfg.m ? 1 : 0;
        });
        ExtrapolationPoint p;
        p.k = k;
        p.samples = cfg.samples_per_k;
        p.hits = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
        p.rho = static_cast<double>(p.hits) / static_cast<double>(p.samples);
        p.beta = reliability_index(p.rho);
        r.points.push_back(p);
        r.nofc += cfg.samples_per_k;
    }
    fit_extrapolation(r, cfg.form);
    return r;
}

}  // namespace dips
