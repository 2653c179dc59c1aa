#include "dips/turbulence.hpp"

#include <cmath>

#include "dips/errors.hpp"

namespace dips {

namespace {

constexpr double kRootThree = 1.7320508075688772935;

using Mat2 = std::array<double, 4>;

// Solves the 3x3 system for the symmetric stationary covariance
// P = Phi P Phi^T + Gamma Gamma^T, unknowns (P00, P01, P11).
std::array<double, 3> stationary_covariance(const Mat2& F, const std::array<double, 2>& G) {
    const double a = F[0], b = F[1], c = F[2], d = F[3];
    double M[3][4] = {
        {1.0 - a * a, -2.0 * a * b, -b * b, G[0] * G[0]},
        {-a * c, 1.0 - (a * d + b * c), -b * d, G[0] * G[1]},
        {-c * c, -2.0 * c * d, 1.0 - d * d, G[1] * G[1]},
    };
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        if (piv != col)
            for (int k = 0; k < 4; ++k) std::swap(M[col][k], M[piv][k]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = M[r][col] / M[col][col];
            for (int k = col; k < 4; ++k) M[r][k] -= f * M[col][k];
        }
    }
    return {M[0][3] / M[0][0], M[1][3] / M[1][1], M[2][3] / M[2][2]};
}

SecondOrderChannel second_order(double sigma, double L, double V, double dt) {
    SecondOrderChannel ch;
    const double p = V / L;
    const double e = std::exp(-p * dt);
    // exp(A dt) for A = [[0, 1], [-p^2, -2p]].
    ch.Phi = {e * (1.0 + p * dt), e * dt, -p * p * dt * e, e * (1.0 - p * dt)};
    // Gamma = A^{-1} (Phi - I) B with B = [0, 1].
    const double m01 = ch.Phi[1];
    const double m11 = ch.Phi[3] - 1.0;
    ch.Gamma = {(-2.0 * p * m01 - m11) / (p * p), m01};
    if (sigma == 0.0) return ch;
    const std::array<double, 2> shape = {p * p, kRootThree * p};
    const auto P = stationary_covariance(ch.Phi, ch.Gamma);
    const double var = shape[0] * shape[0] * P[0] + 2.0 * shape[0] * shape[1] * P[1] + shape[1] * shape[1] * P[2];
    const double k = sigma / std::sqrt(var);
    ch.C = {k * shape[0], k * shape[1]};
    return ch;
}

double apply(const SecondOrderChannel& ch, std::array<double, 2>& x, double g) {
    const double x0 = ch.Phi[0] * x[0] + ch.Phi[1] * x[1] + ch.Gamma[0] * g;
    const double x1 = ch.Phi[2] * x[0] + ch.Phi[3] * x[1] + ch.Gamma[1] * g;
    x = {x0, x1};
    return ch.C[0] * x0 + ch.C[1] * x1;
}

}  // namespace

void DrydenParams::validate() const {
    if (!(sigma_u >= 0 && sigma_v >= 0 && sigma_w >= 0)) throw UsageError("dryden: intensities must be >= 0");
    if (!(L_u > 0 && L_v > 0 && L_w > 0)) throw UsageError("dryden: length scales must be > 0");
}

DrydenCoefficients coefficients(const DrydenParams& params, double V_fps, double dt) {
    if (!(V_fps > 0.0)) throw UsageError("dryden: airspeed must be > 0");
    if (!(dt > 0.0)) throw UsageError("dryden: time step must be > 0");
    params.validate();
    DrydenCoefficients c;
    c.V = V_fps;
    c.dt = dt;
    c.a_u = std::exp(-V_fps * dt / params.L_u);
    c.gain_u = params.sigma_u * std::sqrt(-std::expm1(-2.0 * V_fps * dt / params.L_u));
    c.v = second_order(params.sigma_v, params.L_v, V_fps, dt);
    c.w = second_order(params.sigma_w, params.L_w, V_fps, dt);
    return c;
}

Gust advance(GustFilterState& state, const std::array<double, 3>& g, const DrydenCoefficients& c) {
    state.u = c.a_u * state.u + c.gain_u * g[0];
    Gust out;
    out.u = state.u;
    out.v = apply(c.v, state.v, g[1]);
    out.w = apply(c.w, state.w, g[2]);
    return out;
}

Gust output(const GustFilterState& state, const DrydenCoefficients& c) {
    return {state.u, c.v.C[0] * state.v[0] + c.v.C[1] * state.v[1], c.w.C[0] * state.w[0] + c.w.C[1] * state.w[1]};
}

std::array<double, 3> gust_gaussians(rng::StreamKey key, std::uint64_t step) {
    const auto a = rng::normal_pair(key, step, 0);
    const auto b = rng::normal_pair(key, step, 1);
    return {a[0], a[1], b[0]};
}

Gust DrydenFilter::step(GustFilterState& state, double V_fps, const std::array<double, 3>& gaussians) {
    if (!have_ || cached_.V != V_fps) {
        cached_ = coefficients(params_, V_fps, dt_);
        have_ = true;
    }
    return advance(state, gaussians, cached_);
}

}  // namespace dips
