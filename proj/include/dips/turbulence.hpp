#pragma once

// Dryden gust model realised as white-noise-driven filters.
//
//   G_u(s) = sigma_u sqrt(2 L_u / (pi V)) / (1 + (L_u/V) s)
//   G_v(s) = sigma_v sqrt(2 L_v / (pi V)) (1 + 2 sqrt(3) (L_v/V) s) / (1 + (L_v/V) s)^2
//   G_w(s)   same form as G_v with L_w, sigma_w
//
// Each channel is discretised by zero-order hold with V frozen over the step.
// Output gains are set so that the stationary variance of the discrete
// process equals sigma^2 exactly.

#include <array>
#include <cstdint>

#include "dips/rng.hpp"

namespace dips {

inline constexpr double kFeetPerNm = 6076.12;
inline constexpr double kFpsPerKnot = kFeetPerNm / 3600.0;

struct DrydenParams {
    double sigma_u = 7.0;  // ft/s
    double sigma_v = 7.0;
    double sigma_w = 7.0;
    double L_u = 1750.0;  // ft
    double L_v = 1750.0;
    double L_w = 1750.0;

    void validate() const;
};

// Discrete realisation of one second-order channel:
//   x' = Phi x + Gamma g,   y = C x
struct SecondOrderChannel {
    std::array<double, 4> Phi{};  // row-major
    std::array<double, 2> Gamma{};
    std::array<double, 2> C{};
};

struct DrydenCoefficients {
    double V = 0.0;   // ft/s
    double dt = 0.0;  // s
    double a_u = 0.0;     // discrete pole of the u channel
    double gain_u = 0.0;  // input gain of the u channel
    SecondOrderChannel v;
    SecondOrderChannel w;
};

struct GustFilterState {
    double u = 0.0;
    std::array<double, 2> v{};
    std::array<double, 2> w{};
};

struct Gust {
    double u = 0.0;  // along-track, ft/s
    double v = 0.0;  // lateral, to the right
    double w = 0.0;  // vertical, positive down
};

DrydenCoefficients coefficients(const DrydenParams& params, double V_fps, double dt);

// Advances all three channels by one step and returns the new gusts.
Gust advance(GustFilterState& state, const std::array<double, 3>& gaussians, const DrydenCoefficients& c);

// Current channel outputs without advancing.
Gust output(const GustFilterState& state, const DrydenCoefficients& c);

// Three standard normals for step `step` of stream `key`.
std::array<double, 3> gust_gaussians(rng::StreamKey key, std::uint64_t step);

// Coefficient cache keyed on the exact airspeed.
class DrydenFilter {
public:
    DrydenFilter() = default;
    DrydenFilter(DrydenParams params, double dt) : params_(params), dt_(dt) {}

    Gust step(GustFilterState& state, double V_fps, const std::array<double, 3>& gaussians);

private:
    DrydenParams params_{};
    double dt_ = 0.1;
    DrydenCoefficients cached_{};
    bool have_ = false;
};

}  // namespace dips
