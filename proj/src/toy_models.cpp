#include "dips/toy_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dips/errors.hpp"

namespace dips::toy {

GaussianSweep::State GaussianSweep::spawn(rng::StreamKey key) const {
    State s;
    s.key = key;
    return s;
}

bool GaussianSweep::advance(State& s, double level) const {
    if (s.d_min <= level) return true;
    if (s.done) return false;
    const double need = barrier_ - level;
    if (need <= s.t) {
        s.t = std::max(s.t, need);
        s.d_min = std::max(0.0, barrier_ - s.t);
        return true;
    }
    // Z | Z >= t by inversion of the upper tail.
    const double tail = std::isinf(s.t) ? 1.0 : std_normal_sf(s.t);
    const double u = rng::uniform(s.key, s.draws++);
    const double z = std::max(s.t, std_normal_quantile_upper(u * tail));
    if (z >= need) {
        s.t = need;
        s.d_min = std::max(0.0, level);
        return true;
    }
    s.done = true;
    s.d_min = std::max(0.0, barrier_ - z);
    return false;
}

DriftSde::DriftSde(double a, double c, std::size_t steps, double barrier)
    : a_(a), c_(c), steps_(steps), barrier_(barrier) {
    if (steps == 0) throw UsageError("drift sde: steps must be >= 1");
    dt_ = 1.0 / static_cast<double>(steps);
    sqdt_ = std::sqrt(dt_);
}

DriftSde::State DriftSde::spawn(rng::StreamKey key) const {
    State s;
    s.x = a_;
    s.key = key;
    s.d_min = std::max(0.0, barrier_ - a_);
    return s;
}

bool DriftSde::advance(State& s, double level) const {
    if (s.d_min <= level) return true;
    while (s.k < steps_) {
        s.x += c_ * dt_ + sqdt_ * rng::normal_pair(s.key, s.k, 0)[0];
        ++s.k;
        s.d_min = std::min(s.d_min, std::max(0.0, barrier_ - s.x));
        if (s.d_min <= level) return true;
    }
    return false;
}

ParameterSpace DriftSde::space() {
    return ParameterSpace({StochasticParameter::truncated("a", Normal{0.0, 1.0}),
                           StochasticParameter::truncated("c", Normal{0.0, 1.0})});
}

NoisyThreshold::NoisyThreshold(double x1, double x2, double t) : x1_(x1), x2_(x2), t_(t) {}

NoisyThreshold::State NoisyThreshold::spawn(rng::StreamKey key) const {
    State s;
    s.key = key;
    return s;
}

bool NoisyThreshold::advance(State& s, double level) const {
    if (!s.done) {
        const double e = rng::normal_pair(s.key, 0, 0)[0];
        s.d_min = std::max(0.0, t_ - (x1_ + x2_ + e) / std::sqrt(3.0));
        s.done = true;
    }
    return s.d_min <= level;
}

ParameterSpace NoisyThreshold::space() { return standard_normal_space(2); }

double gaussian_corner(std::span<const double> x, double corner, double scale) {
    double d = 0.0;
    for (double v : x) d += std::max(0.0, corner - v);
    return scale * d;
}

double linear_limit_state(std::span<const double> x, double beta) {
    // d = beta - sum(x)/sqrt(n): reliability index beta under N(0, I).
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    return beta - s / std::sqrt(static_cast<double>(x.size()));
}

double no_target(std::span<const double> x) {
    double d = 1.0;
    for (double v : x) d += v * v;
    return d;
}

double six_hump_camel(double x, double y) {
    const double x2 = x * x;
    return (4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x * y + (-4.0 + 4.0 * y * y) * y * y;
}

ParameterSpace standard_normal_space(std::size_t n) {
    std::vector<StochasticParameter> ps;
    for (std::size_t i = 0; i < n; ++i)
        ps.push_back(StochasticParameter::truncated("x" + std::to_string(i + 1), Normal{0.0, 1.0}));
    return ParameterSpace(std::move(ps));
}

ParameterSpace camel_space() {
    return ParameterSpace({StochasticParameter::bounded("x", Normal{0.0, 3.0}, -3.0, 3.0),
                           StochasticParameter::bounded("y", Normal{0.0, 2.0}, -2.0, 2.0)});
}

}  // namespace dips::toy
