#include <doctest.h>

#include <cmath>
#include <vector>

#include "dips/errors.hpp"
#include "dips/param_space.hpp"
#include "dips/stats.hpp"
#include "dips/toy_models.hpp"
#include "oracles/frozen.hpp"

using namespace dips;

namespace {

const std::vector<double> kSeq = {1e-10, 3e-10, 2e-9, 5e-10};

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

}  // namespace

TEST_CASE("Student quantiles") {
    CHECK(rel_close(student_t_quantile(0.99, 31), oracle::kT99Dof31, 1e-12));
    CHECK(rel_close(student_t_quantile(0.95, 3), oracle::kT95Dof3, 1e-12));
    CHECK_THROWS_AS(student_t_quantile(1.0, 3), UsageError);
    CHECK_THROWS_AS(student_t_quantile(0.95, 0), UsageError);
}

TEST_CASE("log-normal confidence interval") {
    const auto ci = log_ci(kSeq, 0.99);
    CHECK(rel_close(ci.lower, oracle::kSeqLower, 1e-12));
    CHECK(rel_close(ci.upper, oracle::kSeqUpper, 1e-12));
    CHECK(rel_close(dispersion(kSeq, 0.99), oracle::kSeqDispersion, 1e-12));
    const std::vector<double> one = {1e-5};
    CHECK_THROWS_AS(log_ci(one), UsageError);
    const std::vector<double> with_zero = {1e-5, 0.0};
    CHECK_THROWS_AS(log_ci(with_zero), UsageError);
}

TEST_CASE("summary statistics") {
    const auto s = summarize(kSeq);
    CHECK(s.n == 4);
    CHECK(s.sample_mean == doctest::Approx(7.25e-10));
    double lm = 0.0;
    for (double v : kSeq) lm += std::log(v);
    lm /= 4.0;
    CHECK(s.log_mean == doctest::Approx(lm));
    CHECK(s.lognormal_mean == doctest::Approx(std::exp(s.log_mean + 0.5 * s.log_sd * s.log_sd)));
    CHECK(s.skewness > 0.0);
}

TEST_CASE("interval width shrinks with more runs") {
    std::vector<double> many;
    for (int r = 0; r < 8; ++r)
        for (double v : kSeq) many.push_back(v);
    CHECK(dispersion(many) < dispersion(kSeq));
}

TEST_CASE("Welch comparison") {
    const std::vector<double> a = {1e-18, 4e-18, 2.5e-18, 8e-19, 3e-18};
    const std::vector<double> b = {6e-19, 9e-19, 4e-19, 1.2e-18};
    const auto w = compare_runs(a, b);
    CHECK(rel_close(w.T, oracle::kWelchT, 1e-12));
    CHECK(rel_close(w.dof, oracle::kWelchDof, 1e-12));
    CHECK(rel_close(w.p_value, oracle::kWelchP, 1e-10));
    CHECK(w.reject);
    CHECK_FALSE(compare_runs(a, b, 0.01).reject);
    const auto same = compare_runs(a, a);
    CHECK(same.T == doctest::Approx(0.0));
    CHECK_FALSE(same.reject);
}

TEST_CASE("upper quantiles are clamped in stage order") {
    const std::vector<double> upper = {1.7, 0.4, 0.6, 0.01, 0.02};
    const std::vector<double> th = {4.0, 3.0, 2.0, 1.0, 0.0};
    const auto c = clamp_quantiles(upper, th);
    const std::vector<double> expect = {1.0, 0.4, 0.4, 0.01, 0.01};
    CHECK(c == expect);
    const std::vector<double> bad = {1.0, 2.0, 0.0, 3.0, 4.0};
    CHECK_THROWS_AS(clamp_quantiles(upper, bad), UsageError);
}

TEST_CASE("reliability index") {
    CHECK(reliability_index(oracle::kQ4).value() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rel_close(probability_from_index(4.0), oracle::kQ4, 1e-12));
    CHECK_FALSE(reliability_index(0.0).has_value());
    CHECK_FALSE(reliability_index(1.0).has_value());
    CHECK(reliability_index(0.5).value() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("extrapolation fit recovers a synthetic curve") {
    ExtrapolationResult r;
    for (double k : {0.25, 0.5, 0.75, 1.0}) {
        ExtrapolationPoint p;
        p.k = k;
        p.beta = 3.0 * k + 0.5 / k;
        r.points.push_back(p);
    }
    ExtrapolationPoint missing;
    missing.k = 2.0;
    r.points.push_back(missing);
    fit_extrapolation(r, FitForm::asymptotic);
    CHECK(r.A == doctest::Approx(3.0));
    CHECK(r.B == doctest::Approx(0.5));
    CHECK(r.beta1 == doctest::Approx(3.5));
    CHECK(r.probability == doctest::Approx(probability_from_index(3.5)));
    CHECK(r.residual_rms < 1e-12);

    fit_extrapolation(r, FitForm::linear);
    CHECK(r.B == 0.0);

    ExtrapolationResult sparse;
    sparse.points.push_back(missing);
    CHECK_THROWS(fit_extrapolation(sparse, FitForm::asymptotic));
}

TEST_CASE("extrapolation on a linear limit state") {
    const auto space = toy::standard_normal_space(4);
    ExtrapolationConfig cfg;
    cfg.k_grid = {0.35, 0.45, 0.55, 0.7};
    cfg.samples_per_k = 50000;
    const LimitState g = [](std::span<const double> x, rng::StreamKey) { return toy::linear_limit_state(x, 4.0); };
    const auto r = run_extrapolation(g, space, cfg, 3);
    CHECK(r.nofc == 4 * cfg.samples_per_k);
    CHECK(r.beta1 == doctest::Approx(4.0).epsilon(0.05));

    cfg.execution = Execution::parallel;
    const auto again = run_extrapolation(g, space, cfg, 3);
    for (std::size_t i = 0; i < r.points.size(); ++i) CHECK(again.points[i].hits == r.points[i].hits);
}

TEST_CASE("extrapolation configuration validation") {
    ExtrapolationConfig cfg;
    cfg.k_grid = {};
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.k_grid = {0.5, -1.0};
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.k_grid = {0.5};
    cfg.samples_per_k = 0;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
}
