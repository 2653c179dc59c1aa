// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dips/config.hpp"
#include "dips/dips.hpp"
#include "dips/experiment.hpp"
#include "dips/ips.hpp"
#include "dips/scenario.hpp"
#include "dips/stats.hpp"
#include "dips/toy_models.hpp"
#include "dips/turbulence.hpp"
#include "dips/uncertainty.hpp"
#include "oracles/frozen.hpp"

using namespace dips;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Detail {
public:
    template <class T>
    Detail& operator<<(const T& v) {
        os_ << v;
        return *this;
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

std::string config_path(const std::string& name) { return std::string(DIPS_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dips_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

auto corner_factory() {
    return [](std::span<const double> x) {
        std::vector<double> v(x.begin(), x.end());
        return toy::Deterministic([v] { return toy::gaussian_corner(v); });
    };
}

EstimateRun corner_basic(const ParameterSpace& space, std::size_t max_evals, bool stability, int seed = 1) {
    BasicConfig cfg;
    cfg.stop.max_evals = max_evals;
    cfg.stop.beta_skip = 1e-20;
    cfg.stop.use_stability_rule = stability;
    return run_basic(space, corner_factory(), cfg, static_cast<std::uint64_t>(seed));
}

Outcome crisp_corner() {
    const auto cfg = parse_config(config_path("gaussian_corner.ini"));
    CommandOptions opt;
    opt.out_dir = scratch("corner").string();
    const auto t0 = Clock::now();
    const auto res = run_command(cfg, Command::estimate_basic, opt);
    const double wall = seconds_since(t0);
    const double p = res.records.at(0).probabilities.back();
    const double err = std::abs(std::log10(p / oracle::kCornerProbability));
    std::ifstream is(fs::path(*opt.out_dir) / "basic_partition_run0.txt");
    const auto part = read_partition(is);
    const auto evals = part.eval_count();
    Detail d;
    d << "p=" << p << " oracle=" << oracle::kCornerProbability << " |log10 err|=" << err << " evals=" << evals
      << " wall=" << wall << "s";
    return {err <= 0.3 && evals <= 200000 && wall < 60.0, d.str()};
}

Outcome camel() {
    auto ev = [](std::span<const EvalRequest> reqs) {
        std::vector<CentroidEval> out(reqs.size());
        for (std::size_t i = 0; i < reqs.size(); ++i) {
            const auto& u = reqs[i].physical_point;
            out[i].distance = toy::six_hump_camel(-3.0 + 6.0 * u[0], -2.0 + 4.0 * u[1]);
        }
        return out;
    };
    const UnitPrior volume = [](std::span<const double> lo, std::span<const double> hi) {
        double v = 1.0;
        for (std::size_t d = 0; d < lo.size(); ++d) v *= hi[d] - lo[d];
        return v;
    };
    StopConfig stop;
    stop.max_evals = 10000;
    stop.beta_skip = 0.0;
    stop.use_stability_rule = false;
    const ObjectiveConfig obj{ObjectiveKind::plain, 0.0, 10000.0, 1};
    const auto p = run_search_unit(2, ev, volume, stop, obj, EstimatorMode::crisp(-1e300));
    const auto [best, at] = best_point(p);
    const double gap = std::abs(best - oracle::kCamelGridMin);
    Detail d;
    d << "best=" << best << " at (" << -3.0 + 6.0 * at[0] << ", " << -2.0 + 4.0 * at[1] << ") grid=" << oracle::kCamelGridMin
      << " gap=" << gap << " evals=" << p.eval_count();
    return {gap <= 1e-3 && p.eval_count() <= 10000, d.str()};
}

Outcome ips_oracle() {
    const toy::GaussianSweep model(6.0);
    const FiltrationSchedule schedule{{4.0, 2.0, 1.0, 0.0}};
    const std::size_t runs = 32, metas = 32, s = 10000;
    const auto t0 = Clock::now();
    std::size_t covered = 0;
    double worst_factor = 1.0;
    for (std::size_t meta = 0; meta < metas; ++meta) {
        std::vector<double> p(runs);
        for_each_index(Execution::parallel, runs, [&](std::size_t r) {
            p[r] = run_fixed_ips(model, schedule, s, rng::domain_key(1000 + meta, rng::Domain::particles, r)).probability;
        });
        const auto sum = summarize(p);
        worst_factor = std::max(worst_factor, std::exp(std::abs(sum.log_mean - std::log(oracle::kQ6))));
        const auto ci = log_ci(p);
        if (ci.lower <= oracle::kQ6 && oracle::kQ6 <= ci.upper) ++covered;
    }
    const double wall = seconds_since(t0);
    Detail d;
    d << "coverage=" << covered << "/" << metas << " worst geometric-mean factor=" << worst_factor << " wall=" << wall
      << "s";
    return {covered >= 28 && worst_factor <= 3.0 && wall < 600.0, d.str()};
}

Outcome dips_sde() {
    const auto cfg = parse_config(config_path("sde_toy.ini"));
    CommandOptions opt;
    opt.out_dir = scratch("sde").string();
    const auto t0 = Clock::now();
    const auto res = run_command(cfg, Command::estimate_dips, opt);
    const double wall = seconds_since(t0);
    std::vector<double> p;
    for (const auto& r : res.records)
        if (r.probabilities.back() > 0.0) p.push_back(r.probabilities.back());
    if (p.size() < 2) return {false, "fewer than two positive runs"};
    const auto ci = log_ci(p, cfg.algorithm.ci_level);
    const bool overlap = ci.lower <= oracle::kSdeUpper99 && oracle::kSdeLower99 <= ci.upper;
    Detail d;
    d << "runs=" << res.records.size() << " positive=" << p.size() << " interval=[" << ci.lower << ", " << ci.upper
      << "] oracle99=[" << oracle::kSdeLower99 << ", " << oracle::kSdeUpper99 << "] wall=" << wall << "s";
    return {overlap && res.records.size() == 16 && wall < 1800.0, d.str()};
}

Outcome dryden() {
    const DrydenParams params;
    const double V = 250.0 * kFpsPerKnot, dt = 0.1;
    const auto c = coefficients(params, V, dt);
    const auto key = rng::root_key(5);
    const std::size_t n = 1000000, burn = 2000, lag = 10;
    GustFilterState st;
    for (std::uint64_t k = 0; k < burn; ++k) advance(st, gust_gaussians(key.child(1), k), c);
    std::vector<double> u(n);
    double sv[3] = {0, 0, 0}, mv[3] = {0, 0, 0};
    std::vector<std::array<double, 3>> g(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        const auto gust = advance(st, gust_gaussians(key, k), c);
        g[k] = {gust.u, gust.v, gust.w};
        for (int ch = 0; ch < 3; ++ch) mv[ch] += g[k][ch];
    }
    for (int ch = 0; ch < 3; ++ch) mv[ch] /= static_cast<double>(n);
    for (const auto& x : g)
        for (int ch = 0; ch < 3; ++ch) sv[ch] += (x[ch] - mv[ch]) * (x[ch] - mv[ch]);
    bool pass = true;
    Detail d;
    const char* names = "uvw";
    for (int ch = 0; ch < 3; ++ch) {
        const double var = sv[ch] / static_cast<double>(n - 1);
        pass = pass && std::abs(var / 49.0 - 1.0) <= 0.05;
        d << "var_" << names[ch] << "=" << var << " ";
    }
    double num = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) num += (g[i][0] - mv[0]) * (g[i + lag][0] - mv[0]);
    const double rho = num / sv[0];
    const double expect = std::exp(-V * static_cast<double>(lag) * dt / params.L_u);
    pass = pass && std::abs(rho - expect) <= 0.02;
    d << "r_u(1s)=" << rho << " exp(-V tau/L)=" << expect;
    return {pass, d.str()};
}

Outcome extrapolation() {
    const auto space = toy::standard_normal_space(4);
    ExtrapolationConfig cfg;
    cfg.k_grid = {0.25, 0.33, 0.5, 0.75, 1.0};
    cfg.samples_per_k = 100000;
    cfg.execution = Execution::parallel;
    const LimitState g = [](std::span<const double> x, rng::StreamKey) { return toy::linear_limit_state(x, 4.0); };
    const auto r = run_extrapolation(g, space, cfg, 1);
    const double err = std::abs(r.beta1 / 4.0 - 1.0);
    Detail d;
    d << "beta(1)=" << r.beta1 << " A=" << r.A << " B=" << r.B << " rel err=" << err;
    return {err <= 0.05, d.str()};
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

Outcome formulas() {
    const std::vector<double> seq = {1e-10, 3e-10, 2e-9, 5e-10};
    const auto ci = log_ci(seq, 0.99);
    bool pass = rel_close(ci.lower, oracle::kSeqLower, 1e-12) && rel_close(ci.upper, oracle::kSeqUpper, 1e-12) &&
                rel_close(dispersion(seq, 0.99), oracle::kSeqDispersion, 1e-12) &&
                rel_close(student_t_quantile(0.99, 31), oracle::kT99Dof31, 1e-12);
    const std::vector<double> upper = {1.7, 0.4, 0.6, 0.01, 0.02};
    const std::vector<double> th = {4.0, 3.0, 2.0, 1.0, 0.0};
    const std::vector<double> clamped = {1.0, 0.4, 0.4, 0.01, 0.01};
    pass = pass && clamp_quantiles(upper, th) == clamped;
    Detail d;
    d << "ci=[" << ci.lower << ", " << ci.upper << "] theta=" << dispersion(seq, 0.99) << " clamp "
      << (clamp_quantiles(upper, th) == clamped ? "ok" : "wrong");
    return {pass, d.str()};
}

Outcome reuse() {
    const auto space = toy::standard_normal_space(2);
    const auto base = corner_basic(space, 200000, false);
    const auto same = reweight(base.partition, space, {});
    const bool identity = same.stage_probabilities == base.stage_probabilities;
    const std::vector<MomentPerturbation> shift = {parse_perturbation("x1.mean=0.1")};
    const double reweighted = reweight(base.partition, space, shift).stage_probabilities.back();
    const auto shifted_space = perturbed_space(space, shift);
    const double rerun = corner_basic(shifted_space, 200000, false).stage_probabilities.back();
    const double err = std::abs(reweighted / rerun - 1.0);
    // The shift ratio must also follow the analytic tail product.
    const double ratio = reweighted / base.stage_probabilities.back();
    const double exact_ratio = oracle::kCornerShiftedProbability / oracle::kCornerProbability;
    const double ratio_err = std::abs(ratio / exact_ratio - 1.0);
    Detail d;
    d << "identity " << (identity ? "bitwise" : "differs") << "; shifted: reweighted=" << reweighted
      << " re-run=" << rerun << " exact=" << oracle::kCornerShiftedProbability << " rel diff=" << err << "; shift ratio=" << ratio << " exact=" << exact_ratio;
    return {identity && err <= 0.15 && ratio_err <= 0.15, d.str()};
}

Outcome properties() {
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    };
    const auto space = toy::standard_normal_space(2);
    const auto corner = corner_basic(space, 5000, false);
    expect(std::abs(corner.partition.leaf_volume_sum() - 1.0) <= 1e-9, "volume");
    expect(std::abs(corner.partition.leaf_prior_sum() - space.domain_prior()) <= 1e-9, "prior sum");
    for (const auto& d : corner.partition.divisions())
        if (!d.fallback && d.prior < 1e-20 * d.max_leaf_prior) {
            expect(false, "skip rule");
            break;
        }
    BasicConfig heavy_skip;
    heavy_skip.stop.max_evals = 3000;
    heavy_skip.stop.beta_skip = 1e-6;
    heavy_skip.stop.use_stability_rule = false;
    const auto skipped = run_basic(space, corner_factory(), heavy_skip, 2);
    for (const auto& d : skipped.partition.divisions())
        if (!d.fallback && d.prior < 1e-6 * d.max_leaf_prior) {
            expect(false, "skip rule (beta 1e-6)");
            break;
        }

    DipsConfig dc;
    dc.s = 100;
    dc.q = 200;
    dc.schedule = {{4.0, 3.0, 2.0, 1.0, 0.0}};
    dc.lambda = 10.0;
    dc.stop.use_stability_rule = false;
    dc.execution = Execution::parallel;
    auto sde = [](std::span<const double> x) { return toy::DriftSde(x[0], x[1]); };
    std::vector<std::vector<double>> by_workers;
    std::vector<std::vector<double>> traces;
    const int saved_workers = worker_count();
    for (int w : {1, 2, 4}) {
        set_worker_count(w);
        const auto r = run_dips(toy::DriftSde::space(), sde, dc, 5);
        by_workers.push_back(r.stage_probabilities);
        traces.push_back(r.partition.probability_trace());
        for (std::size_t l = 1; l < r.stage_probabilities.size(); ++l)
            expect(r.stage_probabilities[l] <= r.stage_probabilities[l - 1], "stage monotonicity");
        expect(std::abs(r.partition.leaf_volume_sum() - 1.0) <= 1e-9, "dips volume");
        expect(std::abs(r.partition.leaf_prior_sum() - toy::DriftSde::space().domain_prior()) <= 1e-9,
               "dips prior sum");
    }
    set_worker_count(saved_workers);
    expect(by_workers[0] == by_workers[1] && by_workers[1] == by_workers[2], "worker determinism");
    expect(traces[0] == traces[1] && traces[1] == traces[2], "trace determinism");

    const toy::GaussianSweep sweep(6.0);
    const auto ips = run_fixed_ips(sweep, FiltrationSchedule{{4.0, 2.0, 1.0, 0.0}}, 2000, rng::root_key(3));
    for (std::size_t l = 1; l < ips.stages.size(); ++l)
        expect(ips.stages[l].cumulative <= ips.stages[l - 1].cumulative, "ips monotonicity");

    Detail d;
    if (failures.empty()) {
        d << "monotone stages, volume and prior sums, skip rule, determinism over 1/2/4 workers";
    } else {
        d << "failed:";
        for (const auto& f : failures) d << " " << f;
    }
    return {failures.empty(), d.str()};
}

Outcome aircraft() {
    const auto cfg = parse_config(config_path("aircraft.ini"));
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    };
    DisturbanceVector nominal;
    nominal.turbulence = cfg.turbulence;
    const auto nom = simulate(cfg.scenario, nominal, rng::root_key(cfg.seed), {}, false);
    expect(nom.reason == Termination::box_exit && nom.miss_distance > 0.0, "nominal run");

    DisturbanceVector fault = nominal;
    fault.eps_h_ft = -1500.0;
    fault.t_r_s = cfg.scenario.route.max_time_s + 1.0;
    const auto hit = simulate(cfg.scenario, fault, rng::root_key(cfg.seed), {}, false);
    expect(hit.reason == Termination::terrain_hit, "altimeter fault without reaction");

    const double d1 = simulate(cfg.scenario, nominal, rng::root_key(1), {}, false).miss_distance;
    const double d2 = simulate(cfg.scenario, nominal, rng::root_key(2), {}, false).miss_distance;
    expect(d1 != d2, "turbulence seeds");

    const auto reduced = parse_config(config_path("aircraft_reduced.ini"));
    CommandOptions opt;
    opt.out_dir = scratch("aircraft").string();
    const auto t0 = Clock::now();
    const auto res = run_command(reduced, Command::estimate_dips, opt);
    const double wall = seconds_since(t0);
    expect(res.records.size() == 4, "four runs");
    const fs::path dir(*opt.out_dir);
    std::vector<std::string> needed = {"dips_runs.csv",      "dips_run_timing.csv", "dips_convergence_trace.csv",
                                       "dips_intervals.csv", "timing.csv",          "dips_stages.svg",
                                       "dips_convergence.svg"};
    for (int r = 0; r < 4; ++r) needed.push_back("dips_partition_run" + std::to_string(r) + ".txt");
    for (const auto& f : needed) expect(fs::exists(dir / f), "missing " + f);
    expect(wall < 7200.0, "campaign time");

    Detail d;
    d << "nominal d=" << nom.miss_distance << " (" << to_string(nom.reason) << "), fault " << to_string(hit.reason)
      << ", seeds d=" << d1 << "/" << d2 << ", reduced campaign " << wall << "s";
    for (std::size_t i = 0; i < res.records.size(); ++i) d << " P" << i << "=" << res.records[i].probabilities.back();
    if (!failures.empty()) {
        d << "; failed:";
        for (const auto& f : failures) d << " " << f;
    }
    return {failures.empty(), d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    // Optional report file; ctest hides stdout when every check passes.
    std::ofstream report;
    if (argc > 1) report.open(argv[1]);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"crisp estimator on the Gaussian corner", crisp_corner},
        {"DIRECT on the six-hump camel", camel},
        {"IPS on the Gaussian sweep", ips_oracle},
        {"DIPS on the SDE toy", dips_sde},
        {"Dryden variance and correlation", dryden},
        {"extrapolation on a linear limit state", extrapolation},
        {"interval formulas and clamping", formulas},
        {"partition reuse", reuse},
        {"property suite", properties},
        {"aircraft demonstration", aircraft},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        char head[32];
        std::snprintf(head, sizeof head, "%s %2zu ", o.pass ? "PASS" : "FAIL", i + 1);
        const std::string line = head + criteria[i].first + ": " + o.detail;
        std::cout << line << std::endl;
        if (report) report << line << std::endl;
    }
    const std::string summary = std::to_string(criteria.size() - static_cast<std::size_t>(failed)) + " of " +
                                std::to_string(criteria.size()) + " criteria passed";
    std::cout << summary << std::endl;
    if (report) report << summary << std::endl;
    return failed == 0 ? 0 : 1;
}
