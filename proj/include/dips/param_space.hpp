#pragma once

// Stochastic input parameters: marginal distributions, the joint density,
// hyperbox prior masses and the map between the unit search cube and
// physical units.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dips {

struct Normal {
    double mean = 0.0;
    double sigma = 1.0;
};

struct Exponential {
    double mean = 1.0;
};

enum class Moment { mean, stddev };

// Marginal law of one parameter. Tail quantities are computed on the
// complementary side so that masses near 1e-40 keep full relative precision.
class Distribution {
public:
    Distribution(Normal n);        // NOLINT(google-explicit-constructor)
    Distribution(Exponential e);   // NOLINT(google-explicit-constructor)

    double density(double v) const;
    double cdf(double v) const;
    double sf(double v) const;  // 1 - cdf, without cancellation
    double quantile(double p) const;
    double quantile_upper(double q) const;  // v with sf(v) = q
    double median() const;

    // P(lo <= X <= hi); lo <= hi required.
    double interval_mass(double lo, double hi) const;

    double support_lo() const;
    double moment(Moment m) const;
    Distribution with_moment(Moment m, double value) const;

    bool is_normal() const { return std::holds_alternative<Normal>(law_); }
    const std::variant<Normal, Exponential>& law() const { return law_; }
    std::string describe() const;

private:
    std::variant<Normal, Exponential> law_;
};

// Standard normal helpers shared across modules.
double std_normal_cdf(double z);
double std_normal_sf(double z);
double std_normal_pdf(double z);
double std_normal_quantile(double p);
double std_normal_quantile_upper(double q);

inline constexpr double kDefaultTruncationMass = 1e-15;

struct StochasticParameter {
    std::string name;
    Distribution dist;
    double search_lo;
    double search_hi;

    // Bounds at the `tail_mass` and 1 - `tail_mass` quantiles.
    static StochasticParameter truncated(std::string name, Distribution dist,
                                         double tail_mass = kDefaultTruncationMass);
    static StochasticParameter bounded(std::string name, Distribution dist, double lo, double hi);

    double width() const { return search_hi - search_lo; }
};

class ParameterSpace {
public:
    explicit ParameterSpace(std::vector<StochasticParameter> params);

    std::size_t dim() const { return params_.size(); }
    const std::vector<StochasticParameter>& params() const { return params_; }
    const StochasticParameter& operator[](std::size_t i) const { return params_[i]; }
    std::ptrdiff_t index_of(const std::string& name) const;  // -1 if absent

    // Joint density at a physical point (product of marginals).
    double density(std::span<const double> x) const;

    // Prior mass of the physical box [lo, hi].
    double box_prior(std::span<const double> lo, std::span<const double> hi) const;

    // Prior mass of the physical image of the unit-cube box [ulo, uhi].
    double unit_box_prior(std::span<const double> ulo, std::span<const double> uhi) const;

    // Prior mass of the whole search domain.
    double domain_prior() const;

    std::vector<double> to_physical(std::span<const double> u) const;
    std::vector<double> to_unit(std::span<const double> x) const;
    double to_physical(std::size_t d, double u) const;

    // Extremized sample: each gaussian is scaled by 1/k and mapped
    // iso-probabilistically onto the marginal.
    std::vector<double> iso_normal_sample(double k, std::span<const double> gaussians) const;

    // Draw from the marginals truncated to the search box, given uniforms in (0,1).
    std::vector<double> sample_truncated(std::span<const double> uniforms) const;

    ParameterSpace with_distribution(std::size_t d, Distribution dist) const;

private:
    std::vector<StochasticParameter> params_;
};

}  // namespace dips
