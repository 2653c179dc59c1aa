#include "dips/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "dips/errors.hpp"

namespace dips {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

// Phi(z) = erfc(-z/sqrt 2)/2. glibc's erfc is accurate to a few ulp over the
// whole range, including the deep tail where cdf values reach 1e-300.
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double std_normal_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }
double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw UsageError("normal quantile: probability outside [0,1]");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double std_normal_quantile_upper(double q) { return -std_normal_quantile(q); }

Distribution::Distribution(Normal n) : law_(n) {
    if (!(n.sigma > 0.0) || !std::isfinite(n.sigma) || !std::isfinite(n.mean))
        throw UsageError("normal distribution requires finite mean and sigma > 0");
}

Distribution::Distribution(Exponential e) : law_(e) {
    if (!(e.mean > 0.0) || !std::isfinite(e.mean))
        throw UsageError("exponential distribution requires mean > 0");
}

double Distribution::density(double v) const {
    return std::visit(Overloaded{
                          [v](const Normal& n) { return std_normal_pdf((v - n.mean) / n.sigma) / n.sigma; },
                          [v](const Exponential& e) { return v < 0.0 ? 0.0 : std::exp(-v / e.mean) / e.mean; },
                      },
                      law_);
}

double Distribution::cdf(double v) const {
    return std::visit(Overloaded{
                          [v](const Normal& n) { return std_normal_cdf((v - n.mean) / n.sigma); },
                          [v](const Exponential& e) { return v <= 0.0 ? 0.0 : -std::expm1(-v / e.mean); },
                      },
                      law_);
}

double Distribution::sf(double v) const {
    return std::visit(Overloaded{
                          [v](const Normal& n) { return std_normal_sf((v - n.mean) / n.sigma); },
                          [v](const Exponential& e) { return v <= 0.0 ? 1.0 : std::exp(-v / e.mean); },
                      },
                      law_);
}

double Distribution::quantile(double p) const {
    return std::visit(Overloaded{
                          [p](const Normal& n) { return n.mean + n.sigma * std_normal_quantile(p); },
                          [p](const Exponential& e) { return -e.mean * std::log1p(-p); },
                      },
                      law_);
}

double Distribution::quantile_upper(double q) const {
    return std::visit(Overloaded{
                          [q](const Normal& n) { return n.mean + n.sigma * std_normal_quantile_upper(q); },
                          [q](const Exponential& e) { return -e.mean * std::log(q); },
                      },
                      law_);
}

double Distribution::median() const { return quantile(0.5); }

double Distribution::interval_mass(double lo, double hi) const {
    if (lo > hi) throw UsageError("interval_mass: lo > hi");
    if (lo == hi) return 0.0;
    return std::visit(Overloaded{
                          [&](const Normal& n) {
                              const double zl = (lo - n.mean) / n.sigma;
                              const double zh = (hi - n.mean) / n.sigma;
                              if (zl >= 0.0) return std_normal_sf(zl) - std_normal_sf(zh);
                              return std_normal_cdf(zh) - std_normal_cdf(zl);
                          },
                          [&](const Exponential& e) {
                              const double a = std::max(lo, 0.0);
                              const double b = std::max(hi, 0.0);
                              if (b <= a) return 0.0;
                              return std::exp(-a / e.mean) * -std::expm1(-(b - a) / e.mean);
                          },
                      },
                      law_);
}

double Distribution::support_lo() const {
    return is_normal() ? -std::numeric_limits<double>::infinity() : 0.0;
}

double Distribution::moment(Moment m) const {
    return std::visit(Overloaded{
                          [m](const Normal& n) { return m == Moment::mean ? n.mean : n.sigma; },
                          [](const Exponential& e) { return e.mean; },
                      },
                      law_);
}

Distribution Distribution::with_moment(Moment m, double value) const {
    return std::visit(Overloaded{
                          [&](const Normal& n) -> Distribution {
                              Normal out = n;
                              (m == Moment::mean ? out.mean : out.sigma) = value;
                              return out;
                          },
                          // Both moments of an exponential are its mean.
                          [&](const Exponential&) -> Distribution { return Exponential{value}; },
                      },
                      law_);
}

std::string Distribution::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(Overloaded{
                   [&](const Normal& n) { os << "normal(" << n.mean << "," << n.sigma << ")"; },
                   [&](const Exponential& e) { os << "exponential(" << e.mean << ")"; },
               },
               law_);
    return os.str();
}

StochasticParameter StochasticParameter::truncated(std::string name, Distribution dist, double tail_mass) {
    if (!(tail_mass > 0.0 && tail_mass < 0.5)) throw UsageError("truncation mass must lie in (0, 0.5)");
    const double lo = dist.quantile(tail_mass);
    const double hi = dist.quantile_upper(tail_mass);
    return bounded(std::move(name), dist, lo, hi);
}

StochasticParameter StochasticParameter::bounded(std::string name, Distribution dist, double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw UsageError("parameter '" + name + "': search_lo must be < search_hi");
    if (lo < dist.support_lo())
        throw UsageError("parameter '" + name + "': search bounds outside the distribution support");
    return StochasticParameter{std::move(name), dist, lo, hi};
}

ParameterSpace::ParameterSpace(std::vector<StochasticParameter> params) : params_(std::move(params)) {
    if (params_.empty()) throw UsageError("parameter space needs at least one parameter");
    std::set<std::string> names;
    for (const auto& p : params_) {
        if (!names.insert(p.name).second) throw UsageError("duplicate parameter name '" + p.name + "'");
    }
}

std::ptrdiff_t ParameterSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

double ParameterSpace::density(std::span<const double> x) const {
    if (x.size() != dim()) throw UsageError("density: dimension mismatch");
    double g = 1.0;
    for (std::size_t d = 0; d < dim(); ++d) g *= params_[d].dist.density(x[d]);
    return g;
}

double ParameterSpace::box_prior(std::span<const double> lo, std::span<const double> hi) const {
    if (lo.size() != dim() || hi.size() != dim()) throw UsageError("box_prior: dimension mismatch");
    double p = 1.0;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (lo[d] > hi[d]) throw UsageError("box_prior: lo > hi in dimension " + std::to_string(d));
        p *= params_[d].dist.interval_mass(lo[d], hi[d]);
    }
    return p;
}

double ParameterSpace::unit_box_prior(std::span<const double> ulo, std::span<const double> uhi) const {
    if (ulo.size() != dim() || uhi.size() != dim()) throw UsageError("unit_box_prior: dimension mismatch");
    double p = 1.0;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (ulo[d] > uhi[d]) throw UsageError("unit_box_prior: lo > hi in dimension " + std::to_string(d));
        p *= params_[d].dist.interval_mass(to_physical(d, ulo[d]), to_physical(d, uhi[d]));
    }
    return p;
}

double ParameterSpace::domain_prior() const {
    double p = 1.0;
    for (const auto& prm : params_) p *= prm.dist.interval_mass(prm.search_lo, prm.search_hi);
    return p;
}

double ParameterSpace::to_physical(std::size_t d, double u) const {
    const auto& p = params_[d];
    return p.search_lo + u * (p.search_hi - p.search_lo);
}

std::vector<double> ParameterSpace::to_physical(std::span<const double> u) const {
    if (u.size() != dim()) throw UsageError("to_physical: dimension mismatch");
    std::vector<double> x(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        if (!(u[d] >= 0.0 && u[d] <= 1.0)) throw UsageError("to_physical: point outside the unit cube");
        x[d] = to_physical(d, u[d]);
    }
    return x;
}

std::vector<double> ParameterSpace::to_unit(std::span<const double> x) const {
    if (x.size() != dim()) throw UsageError("to_unit: dimension mismatch");
    std::vector<double> u(dim());
    for (std::size_t d = 0; d < dim(); ++d) u[d] = (x[d] - params_[d].search_lo) / params_[d].width();
    return u;
}

std::vector<double> ParameterSpace::iso_normal_sample(double k, std::span<const double> gaussians) const {
    if (!(k > 0.0)) throw UsageError("iso_normal_sample: k must be positive");
    if (gaussians.size() != dim()) throw UsageError("iso_normal_sample: dimension mismatch");
    std::vector<double> x(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        const double z = gaussians[d] / k;
        const auto& dist = params_[d].dist;
        if (const auto* n = std::get_if<Normal>(&dist.law())) {
            x[d] = n->mean + n->sigma * z;
        } else {
            x[d] = z > 0.0 ? dist.quantile_upper(std_normal_sf(z)) : dist.quantile(std_normal_cdf(z));
        }
    }
    return x;
}

std::vector<double> ParameterSpace::sample_truncated(std::span<const double> uniforms) const {
    if (uniforms.size() != dim()) throw UsageError("sample_truncated: dimension mismatch");
    std::vector<double> x(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        const auto& p = params_[d];
        const double a = p.dist.cdf(p.search_lo);
        const double b = p.dist.cdf(p.search_hi);
        x[d] = std::clamp(p.dist.quantile(a + uniforms[d] * (b - a)), p.search_lo, p.search_hi);
    }
    return x;
}

ParameterSpace ParameterSpace::with_distribution(std::size_t d, Distribution dist) const {
    auto params = params_;
    params.at(d).dist = dist;
    return ParameterSpace(std::move(params));
}

}  // namespace dips
