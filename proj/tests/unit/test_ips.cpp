#include <doctest.h>

#include <cmath>
#include <vector>

namespace {
double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
}  // namespace

#include "dips/errors.hpp"
#include "dips/ips.hpp"
#include "dips/param_space.hpp"
#include "dips/rng.hpp"
#include "dips/toy_models.hpp"
#include "oracles/frozen.hpp"

using namespace dips;

namespace {

FiltrationSchedule sweep_schedule() { return {{4.0, 2.0, 1.0, 0.0}}; }

}  // namespace

TEST_CASE("resample indices are in range and roughly uniform") {
    rng::Stream stream(rng::root_key(3));
    const std::size_t n = 10, s = 100000;
    const auto idx = resample_indices(n, s, stream);
    REQUIRE(idx.size() == s);
    std::vector<double> count(n, 0.0);
    bool in_range = true;
    for (auto i : idx) {
        in_range = in_range && i < n;
        if (i < n) count[i] += 1.0;
    }
    REQUIRE(in_range);
    double chi2 = 0.0;
    const double e = static_cast<double>(s) / static_cast<double>(n);
    for (double c : count) chi2 += (c - e) * (c - e) / e;
    CHECK(chi2 < 30.0);  // 9 dof, far in the tail
}

TEST_CASE("schedule validation") {
    CHECK_NOTHROW(FiltrationSchedule::standard().validate());
    CHECK(FiltrationSchedule::standard().size() == 14);
    CHECK(FiltrationSchedule::standard().target() == 0.0);
    CHECK_THROWS_AS((FiltrationSchedule{{1.0, 2.0}}.validate()), UsageError);
    CHECK_THROWS_AS((FiltrationSchedule{{1.0, -1.0}}.validate()), UsageError);
    CHECK_THROWS_AS((FiltrationSchedule{{}}.validate()), UsageError);
}

TEST_CASE("fixed IPS on the Gaussian sweep") {
    const toy::GaussianSweep model(6.0);
    const std::size_t s = 20000;
    const auto res = run_fixed_ips(model, sweep_schedule(), s, rng::root_key(11));
    REQUIRE_FALSE(res.extinct);
    REQUIRE(res.stages.size() == 4);
    CHECK(res.nofc == 4 * s);
    // Stage rates are normal tail ratios.
    const double z[] = {2.0, 4.0, 5.0, 6.0};
    double prev = 1.0;
    for (std::size_t l = 0; l < 4; ++l) {
        const double exact = normal_upper_tail(z[l]) / prev;
        prev = normal_upper_tail(z[l]);
        const double sd = std::sqrt(exact * (1.0 - exact) / static_cast<double>(s));
        CAPTURE(l);
        CHECK(std::abs(res.stages[l].rate - exact) < 5.0 * sd);
    }
    CHECK(res.probability == doctest::Approx(oracle::kQ6).epsilon(0.3));
    for (std::size_t l = 1; l < 4; ++l) CHECK(res.stages[l].cumulative <= res.stages[l - 1].cumulative);
}

TEST_CASE("fixed IPS is identical serial and parallel") {
    const toy::GaussianSweep model(6.0);
    FixedIpsOptions par;
    par.execution = Execution::parallel;
    const auto a = run_fixed_ips(model, sweep_schedule(), 2000, rng::root_key(5));
    const auto b = run_fixed_ips(model, sweep_schedule(), 2000, rng::root_key(5), par);
    REQUIRE(a.stages.size() == b.stages.size());
    for (std::size_t l = 0; l < a.stages.size(); ++l) CHECK(a.stages[l].survivors == b.stages[l].survivors);
    CHECK(a.probability == b.probability);
}

TEST_CASE("extinction is reported with the failing stage") {
    const toy::GaussianSweep model(40.0);
    const auto res = run_fixed_ips(model, FiltrationSchedule{{20.0, 0.0}}, 50, rng::root_key(2));
    CHECK(res.extinct);
    CHECK(res.failing_stage == 1);
    CHECK(res.probability == 0.0);
    const auto cum = res.cumulative(2);
    CHECK(cum[0] == 0.0);
    CHECK(cum[1] == 0.0);
}

TEST_CASE("full first stage records the mean final distance") {
    const toy::GaussianSweep model(6.0);
    FixedIpsOptions opt;
    opt.full_first_stage = true;
    const auto res = run_fixed_ips(model, sweep_schedule(), 5000, rng::root_key(8), opt);
    // E[max(0, 6 - Z)] is 6 to within 1e-9.
    CHECK(res.mean_distance == doctest::Approx(6.0).epsilon(0.01));
    const auto plain = run_fixed_ips(model, sweep_schedule(), 5000, rng::root_key(8));
    CHECK(plain.stages[0].survivors == res.stages[0].survivors);
}

TEST_CASE("backtracking rule") {
    CHECK(backtrack_threshold(100.0, 25.0) == doctest::Approx(50.0));
    CHECK(backtrack_threshold(100.0, 0.0) == doctest::Approx(50.0));
    const double m = backtrack_threshold(9.0, 1.0);
    CHECK(m < 9.0);
    CHECK(m > 1.0);
}

TEST_CASE("adaptive IPS on the Gaussian sweep") {
    const toy::GaussianSweep model(6.0);
    AdaptiveIpsConfig cfg;
    cfg.initial_threshold = 4.0;
    cfg.target = 0.0;
    cfg.n_s = 500;
    cfg.max_failures = 100000;
    cfg.min_gap = 0.05;
    const auto res = run_adaptive_ips(model, cfg, rng::root_key(21));
    REQUIRE_FALSE(res.extinct);
    REQUIRE_FALSE(res.thresholds.empty());
    CHECK(res.thresholds.back() == 0.0);
    for (std::size_t i = 1; i < res.thresholds.size(); ++i) CHECK(res.thresholds[i] < res.thresholds[i - 1]);
    CHECK(res.probability > oracle::kQ6 / 3.0);
    CHECK(res.probability < oracle::kQ6 * 3.0);

    AdaptiveIpsConfig par = cfg;
    par.execution = Execution::parallel;
    const auto again = run_adaptive_ips(model, par, rng::root_key(21));
    CHECK(again.probability == res.probability);
    CHECK(again.thresholds == res.thresholds);
}

TEST_CASE("adaptive IPS backtracks when a jump is too far") {
    const toy::GaussianSweep model(6.0);
    AdaptiveIpsConfig cfg;
    cfg.initial_threshold = 4.0;
    cfg.n_s = 200;
    cfg.max_failures = 2000;
    cfg.min_gap = 0.05;
    const auto res = run_adaptive_ips(model, cfg, rng::root_key(4));
    CHECK(res.backtracks > 0);
    CHECK(res.thresholds.size() > 2);
    CHECK(res.probability > 0.0);
}

TEST_CASE("adaptive configuration validation") {
    AdaptiveIpsConfig cfg;
    cfg.n_s = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg = {};
    cfg.enlarge_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
}
