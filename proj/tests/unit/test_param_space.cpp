#include <doctest.h>

#include <cmath>

#include "dips/errors.hpp"
#include "dips/param_space.hpp"
#include "oracles/frozen.hpp"

using namespace dips;

TEST_CASE("normal tails against high-precision references") {
    CHECK(std_normal_cdf(1.0) == doctest::Approx(oracle::kPhi1).epsilon(1e-14));
    CHECK(std_normal_sf(6.0) == doctest::Approx(oracle::kQ6).epsilon(1e-12));
    CHECK(std_normal_sf(4.0) == doctest::Approx(oracle::kQ4).epsilon(1e-12));
    const Distribution d(Normal{0.0, 1.0});
    CHECK(d.interval_mass(0.0, 1.0) == doctest::Approx(oracle::kPhi1MinusPhi0).epsilon(1e-14));
    // Far tails keep relative precision.
    CHECK(d.interval_mass(20.0, 21.0) > 0.0);
    CHECK(d.interval_mass(-21.0, -20.0) == doctest::Approx(d.interval_mass(20.0, 21.0)).epsilon(1e-12));
}

TEST_CASE("quantiles invert the cdf") {
    for (double p : {1e-300, 1e-40, 1e-9, 0.01, 0.3, 0.5, 0.9}) {
        CHECK(std_normal_cdf(std_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
        CHECK(std_normal_sf(std_normal_quantile_upper(p)) == doctest::Approx(p).epsilon(1e-10));
    }
    const Distribution e(Exponential{30.0});
    CHECK(e.quantile(0.5) == doctest::Approx(30.0 * std::log(2.0)));
    CHECK(e.sf(e.quantile_upper(1e-30)) == doctest::Approx(1e-30).epsilon(1e-10));
}

TEST_CASE("exponential law") {
    const Distribution e(Exponential{30.0});
    CHECK(e.cdf(-1.0) == 0.0);
    CHECK(e.sf(60.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(e.density(0.0) == doctest::Approx(1.0 / 30.0));
    CHECK(e.interval_mass(30.0, 60.0) == doctest::Approx(std::exp(-1.0) - std::exp(-2.0)));
    CHECK(e.moment(Moment::mean) == 30.0);
}

TEST_CASE("moment changes are validated") {
    const Distribution n(Normal{1.0, 2.0});
    CHECK(n.with_moment(Moment::stddev, 3.0).moment(Moment::stddev) == 3.0);
    CHECK_THROWS_AS(n.with_moment(Moment::stddev, 0.0), UsageError);
    CHECK_THROWS_AS(Distribution(Exponential{1.0}).with_moment(Moment::mean, -1.0), UsageError);
}

TEST_CASE("box priors are multiplicative and add up over a split") {
    const ParameterSpace space({StochasticParameter::truncated("a", Normal{0.0, 100.0}),
                                StochasticParameter::truncated("b", Exponential{30.0})});
    const std::vector<double> lo{0.0, 0.0}, hi{1.0, 1.0};
    CHECK(space.unit_box_prior(lo, hi) == doctest::Approx(space.domain_prior()).epsilon(1e-15));
    CHECK(space.domain_prior() == doctest::Approx(1.0).epsilon(1e-12));
    // Split the first axis in thirds; masses add up.
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        const std::vector<double> l{i / 3.0, 0.2}, h{(i + 1) / 3.0, 0.7};
        sum += space.unit_box_prior(l, h);
    }
    const std::vector<double> l{0.0, 0.2}, h{1.0, 0.7};
    CHECK(sum == doctest::Approx(space.unit_box_prior(l, h)).epsilon(1e-12));
    CHECK_THROWS_AS(space.unit_box_prior(h, l), UsageError);
}

TEST_CASE("unit and physical coordinates round trip") {
    const ParameterSpace space({StochasticParameter::bounded("eps_h", Normal{0.0, 100.0}, -2500.0, 1000.0)});
    const std::vector<double> u{0.25};
    CHECK(space.to_physical(u)[0] == doctest::Approx(-1625.0));
    CHECK(space.to_unit(space.to_physical(u))[0] == doctest::Approx(0.25));
    CHECK(space.index_of("eps_h") == 0);
    CHECK(space.index_of("nope") == -1);
}

TEST_CASE("truncated bounds sit at the requested tail mass") {
    const auto p = StochasticParameter::truncated("x", Normal{0.0, 1.0}, 1e-15);
    CHECK(std_normal_sf(p.search_hi) == doctest::Approx(1e-15).epsilon(1e-9));
    CHECK(p.search_lo == doctest::Approx(-p.search_hi));
    CHECK_THROWS_AS(StochasticParameter::bounded("x", Normal{}, 1.0, 0.0), UsageError);
}

TEST_CASE("extremized samples map gaussians iso-probabilistically") {
    const ParameterSpace space({StochasticParameter::truncated("x", Normal{5.0, 2.0}),
                                StochasticParameter::truncated("t", Exponential{30.0})});
    const std::vector<double> g{1.0, 1.0};
    const auto x1 = space.iso_normal_sample(1.0, g);
    CHECK(x1[0] == doctest::Approx(7.0));
    CHECK(Distribution(Exponential{30.0}).cdf(x1[1]) == doctest::Approx(oracle::kPhi1).epsilon(1e-12));
    const auto xk = space.iso_normal_sample(0.5, g);
    CHECK(xk[0] == doctest::Approx(9.0));
}

TEST_CASE("truncated sampling stays inside the search box") {
    const ParameterSpace space({StochasticParameter::bounded("x", Normal{0.0, 1.0}, 1.0, 2.0)});
    for (double u : {1e-12, 0.3, 0.999999}) {
        const std::vector<double> uu{u};
        const double x = space.sample_truncated(uu)[0];
        CHECK(x >= 1.0);
        CHECK(x <= 2.0);
    }
}
