#include <doctest.h>

#include <cmath>
#include <vector>

#include "dips/dips.hpp"
#include "dips/errors.hpp"
#include "dips/toy_models.hpp"
#include "oracles/frozen.hpp"

using namespace dips;

namespace {

auto noisy_factory(double t) {
    return [t](std::span<const double> x) { return toy::NoisyThreshold(x[0], x[1], t); };
}

auto sde_factory() {
    return [](std::span<const double> x) { return toy::DriftSde(x[0], x[1]); };
}

DipsConfig small_sde_config(Execution ex = Execution::serial) {
    DipsConfig cfg;
    cfg.s = 100;
    cfg.q = 150;
    cfg.schedule = {{4.0, 3.0, 2.0, 1.0, 0.0}};
    cfg.lambda = 10.0;
    cfg.stop.use_stability_rule = false;
    cfg.execution = ex;
    return cfg;
}

}  // namespace

TEST_CASE("configuration validation") {
    DipsConfig d;
    CHECK_NOTHROW(d.validate());
    d.s = 1;
    CHECK_THROWS_AS(d.validate(), UsageError);
    d = {};
    d.q = 0;
    CHECK_THROWS_AS(d.validate(), UsageError);
    d = {};
    d.lambda = -1.0;
    CHECK_THROWS_AS(d.validate(), UsageError);
    OuterMuConfig o;
    CHECK_NOTHROW(o.validate());
    o.s = 0;
    CHECK_THROWS_AS(o.validate(), UsageError);
}

TEST_CASE("outer-mu on the noisy threshold model") {
    OuterMuConfig cfg;
    cfg.s = 100;
    cfg.q = 3000;
    cfg.lambda = 10.0;
    cfg.stop.use_stability_rule = false;
    const auto r = run_outer_mu(toy::NoisyThreshold::space(), noisy_factory(3.719), cfg, 1);
    REQUIRE(r.stage_probabilities.size() == 1);
    CHECK_FALSE(r.no_target);
    const double ratio = r.stage_probabilities[0] / oracle::kQ3719;
    CAPTURE(r.stage_probabilities[0]);
    CHECK(ratio > 1.0 / 3.0);
    CHECK(ratio < 3.0);
    CHECK(r.nofc == cfg.s * r.partition.eval_count());
}

TEST_CASE("DIPS stage probabilities are nonincreasing") {
    const auto r = run_dips(toy::DriftSde::space(), sde_factory(), small_sde_config(), 7);
    REQUIRE(r.stage_probabilities.size() == 5);
    CHECK(r.stage_probabilities.front() <= 1.0);
    for (std::size_t l = 1; l < r.stage_probabilities.size(); ++l)
        CHECK(r.stage_probabilities[l] <= r.stage_probabilities[l - 1]);
    CHECK(r.partition.eval_count() <= 150);
    CHECK(r.partition.eval_count() >= 149);
    const auto again = stage_probabilities(r.partition, 5);
    CHECK(again == r.stage_probabilities);
}

TEST_CASE("DIPS is reproducible and independent of execution mode") {
    const auto a = run_dips(toy::DriftSde::space(), sde_factory(), small_sde_config(), 3, 2);
    const auto b = run_dips(toy::DriftSde::space(), sde_factory(), small_sde_config(Execution::parallel), 3, 2);
    CHECK(a.stage_probabilities == b.stage_probabilities);
    CHECK(a.nofc == b.nofc);
    const auto c = run_dips(toy::DriftSde::space(), sde_factory(), small_sde_config(), 3, 3);
    CHECK(c.stage_probabilities != a.stage_probabilities);
}

TEST_CASE("a model without a target gives zero and the flag") {
    auto factory = [](std::span<const double> x) {
        std::vector<double> v(x.begin(), x.end());
        return toy::Deterministic([v] { return toy::no_target(v); });
    };
    BasicConfig cfg;
    cfg.stop.max_evals = 300;
    cfg.stop.use_stability_rule = false;
    const auto r = run_basic(toy::standard_normal_space(2), factory, cfg, 1);
    CHECK(r.no_target);
    CHECK(r.stage_probabilities.back() == 0.0);
}

TEST_CASE("basic estimator on the Gaussian corner") {
    auto factory = [](std::span<const double> x) {
        std::vector<double> v(x.begin(), x.end());
        return toy::Deterministic([v] { return toy::gaussian_corner(v); });
    };
    BasicConfig cfg;
    cfg.stop.max_evals = 20000;
    cfg.stop.beta_skip = 1e-20;
    cfg.stop.use_stability_rule = false;
    const auto r = run_basic(toy::standard_normal_space(2), factory, cfg, 1);
    CHECK_FALSE(r.no_target);
    CHECK(std::abs(std::log10(r.stage_probabilities[0] / oracle::kCornerProbability)) < 0.3);
}
