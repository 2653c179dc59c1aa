// Serial reference against the OpenMP kernels. Argument 0 is serial, 1 is
// parallel; results are identical by construction, only time differs.

#include <benchmark/benchmark.h>

#include <vector>

#include "dips/dips.hpp"
#include "dips/ips.hpp"
#include "dips/stats.hpp"
#include "dips/toy_models.hpp"

using namespace dips;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

std::vector<EvalRequest> requests(std::size_t n) {
    std::vector<EvalRequest> reqs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        reqs[i].eval_index = i;
        reqs[i].physical_point = {2.0 * t - 1.0, 1.0 - t};
    }
    return reqs;
}

auto sde_factory() {
    return [](std::span<const double> x) { return toy::DriftSde(x[0], x[1]); };
}

void BM_CrudeEvaluator(benchmark::State& state) {
    const auto ev = crude_evaluator(sde_factory(), 200, 0.0, rng::root_key(1), mode(state));
    const auto reqs = requests(32);
    for (auto _ : state) benchmark::DoNotOptimize(ev(reqs));
    state.SetItemsProcessed(state.iterations() * 32 * 200);
}

void BM_IpsEvaluator(benchmark::State& state) {
    const FiltrationSchedule schedule{{4.0, 3.0, 2.0, 1.0, 0.0}};
    const auto ev = ips_evaluator(sde_factory(), schedule, 200, rng::root_key(2), mode(state));
    const auto reqs = requests(16);
    for (auto _ : state) benchmark::DoNotOptimize(ev(reqs));
}

void BM_FixedIps(benchmark::State& state) {
    const toy::DriftSde model(0.5, 0.5);
    const FiltrationSchedule schedule{{4.0, 3.0, 2.0, 1.0, 0.0}};
    FixedIpsOptions opt;
    opt.execution = mode(state);
    for (auto _ : state) benchmark::DoNotOptimize(run_fixed_ips(model, schedule, 5000, rng::root_key(3), opt));
}

void BM_Extrapolation(benchmark::State& state) {
    const auto space = toy::standard_normal_space(4);
    ExtrapolationConfig cfg;
    cfg.samples_per_k = 20000;
    cfg.execution = mode(state);
    const LimitState g = [](std::span<const double> x, rng::StreamKey) { return toy::linear_limit_state(x, 4.0); };
    for (auto _ : state) benchmark::DoNotOptimize(run_extrapolation(g, space, cfg, 4));
}

}  // namespace

BENCHMARK(BM_CrudeEvaluator)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IpsEvaluator)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FixedIps)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Extrapolation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
