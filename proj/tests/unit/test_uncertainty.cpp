#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "dips/dips.hpp"
#include "dips/errors.hpp"
#include "dips/toy_models.hpp"
#include "dips/uncertainty.hpp"
#include "oracles/frozen.hpp"

using namespace dips;

namespace {

// Crisp corner partition in `dim` dimensions; only x1 and x2 enter the limit state.
EstimateRun make_corner_run(std::size_t dim) {
    auto factory = [](std::span<const double> x) {
        std::vector<double> v(x.begin(), x.begin() + 2);
        return toy::Deterministic([v] { return toy::gaussian_corner(v); });
    };
    BasicConfig cfg;
    cfg.stop.max_evals = dim == 2 ? 20000 : 40000;
    cfg.stop.beta_skip = 1e-20;
    cfg.stop.use_stability_rule = false;
    return run_basic(toy::standard_normal_space(dim), factory, cfg, 1);
}

const EstimateRun& corner2() {
    static const EstimateRun r = make_corner_run(2);
    return r;
}

const EstimateRun& corner3() {
    static const EstimateRun r = make_corner_run(3);
    return r;
}

}  // namespace

TEST_CASE("perturbation parsing") {
    auto p = parse_perturbation("eps_h.mean=+10%");
    CHECK(p.parameter == "eps_h");
    CHECK(p.moment == Moment::mean);
    CHECK(p.kind == MomentPerturbation::Kind::relative);
    CHECK(p.value == doctest::Approx(0.1));
    CHECK(p.apply(200.0) == doctest::Approx(220.0));

    p = parse_perturbation("t_r.stddev=3.5");
    CHECK(p.moment == Moment::stddev);
    CHECK(p.kind == MomentPerturbation::Kind::absolute);
    CHECK(p.apply(1.0) == 3.5);

    p = parse_perturbation(" x1.mean = -5% ");
    CHECK(p.apply(100.0) == doctest::Approx(95.0));

    CHECK_THROWS_AS(parse_perturbation("x1.skew=1"), UsageError);
    CHECK_THROWS_AS(parse_perturbation("x1=1"), UsageError);
    CHECK_THROWS_AS(parse_perturbation("x1.mean=abc"), UsageError);
}

TEST_CASE("perturbed space keeps the search bounds") {
    const auto space = toy::standard_normal_space(2);
    const std::vector<MomentPerturbation> ps = {parse_perturbation("x1.mean=0.5"), parse_perturbation("x2.stddev=2")};
    const auto q = perturbed_space(space, ps);
    CHECK(q[0].dist.moment(Moment::mean) == 0.5);
    CHECK(q[1].dist.moment(Moment::stddev) == 2.0);
    CHECK(q[0].search_lo == space[0].search_lo);
    CHECK(q[1].search_hi == space[1].search_hi);
    const std::vector<MomentPerturbation> bad = {parse_perturbation("x9.mean=1")};
    CHECK_THROWS_AS(perturbed_space(space, bad), UsageError);
    const std::vector<MomentPerturbation> neg = {parse_perturbation("x1.stddev=-1")};
    CHECK_THROWS_AS(perturbed_space(space, neg), UsageError);
}

TEST_CASE("identity reweighting is bitwise exact") {
    const auto& run = corner2();
    const auto space = toy::standard_normal_space(2);
    const auto r = reweight(run.partition, space, {});
    CHECK(r.stage_probabilities == run.stage_probabilities);
    CHECK(r.stage_probabilities == partition_probabilities(run.partition));
    CHECK(r.escaped_mass == 0.0);
    CHECK_FALSE(r.escaped_warning);
}

TEST_CASE("reweighted leaf priors still sum to the domain prior") {
    const auto& run = corner2();
    const auto space = toy::standard_normal_space(2);
    const std::vector<MomentPerturbation> ps = {parse_perturbation("x1.mean=0.3"), parse_perturbation("x2.stddev=1.2")};
    const auto q = perturbed_space(space, ps);
    double sum = 0.0;
    for (const auto& b : run.partition.boxes()) {
        if (!b.leaf) continue;
        std::vector<double> lo(2), hi(2);
        for (std::size_t d = 0; d < 2; ++d) {
            lo[d] = b.unit_lo(d);
            hi[d] = b.unit_hi(d);
        }
        sum += q.unit_box_prior(lo, hi);
    }
    const auto r = reweight(run.partition, space, ps);
    CHECK(sum == doctest::Approx(r.domain_prior).epsilon(1e-9));
    CHECK(r.domain_prior == doctest::Approx(q.domain_prior()).epsilon(1e-12));
}

TEST_CASE("a mean shift moves the estimate by the exact ratio") {
    const auto& run = corner2();
    const auto space = toy::standard_normal_space(2);
    const std::vector<MomentPerturbation> ps = {parse_perturbation("x1.mean=0.1")};
    const auto r = reweight(run.partition, space, ps);
    const double got = r.stage_probabilities.back() / run.stage_probabilities.back();
    const double exact = oracle::kCornerShiftedProbability / oracle::kCornerProbability;
    CHECK(got == doctest::Approx(exact).epsilon(0.15));
}

TEST_CASE("sensitivity rates") {
    const auto& run = corner3();
    const auto space = toy::standard_normal_space(3);
    const std::vector<SensitivityTarget> targets = {{"x1", Moment::mean}, {"x3", Moment::mean}};
    const auto rates = sensitivity(run.partition, space, targets, 0.01);
    REQUIRE(rates.size() == 2);
    // Sorted by magnitude: the corner coordinate first.
    CHECK(rates[0].parameter == "x1");
    CHECK(rates[0].rate == doctest::Approx(oracle::kMills45).epsilon(0.10));
    CHECK(rates[0].step == doctest::Approx(0.01));
    CHECK(rates[1].parameter == "x3");
    CHECK(std::abs(rates[1].rate) < 0.05 * oracle::kMills45);

    const auto every = all_moments(space);
    CHECK(every.size() == 6);
}

TEST_CASE("escaped mass is flagged") {
    const auto& run = corner2();
    const auto space = toy::standard_normal_space(2);
    const std::vector<MomentPerturbation> ps = {parse_perturbation("x1.mean=5")};
    const auto r = reweight(run.partition, space, ps);
    CHECK(r.escaped_mass > 0.0);
    CHECK(r.escaped_warning);
    CHECK_FALSE(r.warning.empty());
}

TEST_CASE("corner search orders cases by probability") {
    const auto& run = corner2();
    const auto space = toy::standard_normal_space(2);
    const std::vector<MomentRange> ranges = {{"x1", Moment::mean, -0.1, 0.1}, {"x2", Moment::stddev, 0.9, 1.1}};
    const auto cases = corner_search(run.partition, space, ranges);
    REQUIRE(cases.size() == 4);
    for (std::size_t i = 1; i < cases.size(); ++i)
        CHECK(cases[i].result.stage_probabilities.back() >= cases[i - 1].result.stage_probabilities.back());
    // The worst case raises the mean and widens the spread.
    const auto& worst = cases.back().perturbations;
    REQUIRE(worst.size() == 2);
    CHECK(worst[0].value == 0.1);
    CHECK(worst[1].value == 1.1);
}

TEST_CASE("partition header restores the parameter space") {
    const auto& run = corner2();
    const auto space = toy::standard_normal_space(2);
    std::stringstream ss;
    write_partition(ss, run.partition, space);
    const auto header = read_partition_header(ss);
    const auto restored = space_from_header(header);
    REQUIRE(restored.dim() == 2);
    CHECK(restored[0].name == "x1");
    CHECK(restored[1].dist.moment(Moment::stddev) == doctest::Approx(1.0));
    CHECK(restored[0].search_lo == doctest::Approx(space[0].search_lo));
}

TEST_CASE("target level verdicts") {
    CHECK(tls_verdict(1e-10, 5e-10, 1e-9) == Verdict::pass);
    CHECK(tls_verdict(2e-9, 3e-9, 1e-9) == Verdict::fail);
    CHECK(tls_verdict(5e-10, 2e-9, 1e-9) == Verdict::indeterminate);
    CHECK_THROWS_AS(tls_verdict(2.0, 1.0, 1e-9), UsageError);
    CHECK(to_string(Verdict::indeterminate) == "Indeterminate");
    CHECK(to_string(Moment::stddev) == "stddev");
}
