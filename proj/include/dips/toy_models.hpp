#pragma once

// Synthetic models with known answers.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "dips/param_space.hpp"
#include "dips/rng.hpp"

namespace dips::toy {

// d = max(0, barrier - Z) with Z ~ N(0, 1), realised as a sweep in the
// level t: the state records only that Z >= t, and each continuation draws Z
// from its tail beyond t. First passage of distance m happens at
// t = barrier - m, so stage survival rates are exact normal tail ratios and
// the target probability is Q(barrier).
class GaussianSweep {
public:
    struct State {
        double t = -std::numeric_limits<double>::infinity();  // Z >= t known
        bool done = false;
        std::uint32_t draws = 0;
        double d_min = std::numeric_limits<double>::infinity();
        rng::StreamKey key;
    };

    explicit GaussianSweep(double barrier = 6.0) : barrier_(barrier) {}

    State spawn(rng::StreamKey key) const;
    bool advance(State& s, double level) const;
    double distance(const State& s) const { return s.d_min; }
    void rebranch(State& s, rng::StreamKey key) const { s.key = key; }

    double barrier() const { return barrier_; }

private:
    double barrier_;
};

// Brownian motion with drift on [0, 1]: X_0 = a, dX = c dt + dW, Euler
// grid of `steps`; distance = max(0, barrier - running maximum of X).
class DriftSde {
public:
    struct State {
        std::uint32_t k = 0;
        double x = 0.0;
        double d_min = std::numeric_limits<double>::infinity();
        rng::StreamKey key;
    };

    DriftSde(double a, double c, std::size_t steps = 50, double barrier = kDefaultBarrier);

    State spawn(rng::StreamKey key) const;
    bool advance(State& s, double level) const;
    double distance(const State& s) const { return s.d_min; }
    void rebranch(State& s, rng::StreamKey key) const { s.key = key; }

    // Gives a hit probability near 1e-5 with a, c ~ N(0, 1).
    static constexpr double kDefaultBarrier = 7.4;

    // Parameters a and c with standard normal priors.
    static ParameterSpace space();

private:
    double a_, c_;
    std::size_t steps_;
    double barrier_;
    double dt_, sqdt_;
};

// Distance max(0, t - (x1 + x2 + e)/sqrt 3) with one N(0,1) draw e per
// instance; with x1, x2 ~ N(0,1) the hit probability is Q(t).
class NoisyThreshold {
public:
    struct State {
        bool done = false;
        double d_min = std::numeric_limits<double>::infinity();
        rng::StreamKey key;
    };

    NoisyThreshold(double x1, double x2, double t);

    State spawn(rng::StreamKey key) const;
    bool advance(State& s, double level) const;
    double distance(const State& s) const { return s.d_min; }
    void rebranch(State& s, rng::StreamKey key) const { s.key = key; }

    static ParameterSpace space();

private:
    double x1_, x2_, t_;
};

// Deterministic limit states.
double gaussian_corner(std::span<const double> x, double corner = 4.5, double scale = 100.0);
double linear_limit_state(std::span<const double> x, double beta = 4.0);
double no_target(std::span<const double> x);
double six_hump_camel(double x, double y);

inline constexpr double kCamelMinimum = -1.031628453489877;

ParameterSpace standard_normal_space(std::size_t n);
// x in [-3, 3], y in [-2, 2]; priors are irrelevant for optimisation.
ParameterSpace camel_space();

// Wraps a deterministic limit state as a splitting model.
template <class F>
class Deterministic {
public:
    struct State {
        bool done = false;
        double d_min = std::numeric_limits<double>::infinity();
    };

    explicit Deterministic(F f) : f_(f) {}
    State spawn(rng::StreamKey) const { return {}; }
    bool advance(State& s, double level) const {
        if (!s.done) {
            s.d_min = f_();
            s.done = true;
        }
        return s.d_min <= level;
    }
    double distance(const State& s) const { return s.d_min; }
    void rebranch(State&, rng::StreamKey) const {}

private:
    F f_;
};

}  // namespace dips::toy
