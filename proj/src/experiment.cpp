#include "dips/experiment.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "dips/dips.hpp"
#include "dips/parallel.hpp"
#include "dips/toy_models.hpp"

namespace dips {

namespace fs = std::filesystem;

std::string algorithm_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::estimate_basic: return "basic";
        case Command::estimate_dips: return "dips";
        case Command::estimate_outer_mu: return "outer_mu";
        case Command::estimate_ips_fixed: return "ips_fixed";
        case Command::estimate_ips_adaptive: return "ips_adaptive";
        case Command::estimate_extrapolation: return "extrapolation";
        case Command::reweight: return "reweight";
        case Command::report: return "report";
    }
    return "?";
}

namespace {

template <class F>
auto deterministic(F f) {
    return [f](std::span<const double> x) {
        std::vector<double> v(x.begin(), x.end());
        return toy::Deterministic([f, v] { return f(std::span<const double>(v)); });
    };
}

// Calls `visit` with a factory mapping a physical point to a model.
template <class V>
void with_model(const ExperimentConfig& cfg, V&& visit) {
    const auto& toy = cfg.toy;
    switch (cfg.model) {
        case ModelKind::aircraft: {
            const auto names = cfg.parameter_names();
            const Scenario sc = cfg.scenario;
            const bool turb = cfg.turbulence;
            visit([sc, names, turb](std::span<const double> x) {
                return ScenarioModel(sc, disturbance_from(names, x, turb));
            });
            return;
        }
        case ModelKind::gaussian_corner: {
            const double a = toy.corner, s = toy.scale_ft;
            visit(deterministic([a, s](std::span<const double> x) { return toy::gaussian_corner(x, a, s); }));
            return;
        }
        case ModelKind::linear: {
            const double b = toy.beta;
            visit(deterministic([b](std::span<const double> x) { return toy::linear_limit_state(x, b); }));
            return;
        }
        case ModelKind::no_target:
            visit(deterministic([](std::span<const double> x) { return toy::no_target(x); }));
            return;
        case ModelKind::camel:
            visit(deterministic([](std::span<const double> x) { return toy::six_hump_camel(x[0], x[1]); }));
            return;
        case ModelKind::sde_toy: {
            const std::size_t steps = toy.steps;
            const double barrier = toy.barrier;
            visit([steps, barrier](std::span<const double> x) { return toy::DriftSde(x[0], x[1], steps, barrier); });
            return;
        }
        case ModelKind::gaussian_sweep: {
            const double b = toy.sweep_barrier;
            visit([b](std::span<const double>) { return toy::GaussianSweep(b); });
            return;
        }
        case ModelKind::noisy_threshold: {
            const double t = toy.threshold;
            visit([t](std::span<const double> x) { return toy::NoisyThreshold(x[0], x[1], t); });
            return;
        }
    }
}

struct RunOutput {
    RunRecord record;
    std::optional<Partition> partition;
    std::optional<ExtrapolationResult> extrapolation;
};

std::string full_precision(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

void note(const CommandOptions& opt, const std::string& msg) {
    if (opt.log) *opt.log << msg << "\n";
}

std::string dims_descriptor(const ExperimentConfig& cfg) {
    std::string s = std::to_string(cfg.parameters.size()) + " vars";
    if (cfg.model == ModelKind::aircraft) s += cfg.turbulence ? " + turbulence" : " deterministic";
    return s;
}

// One estimator run, keyed only by (seed, run).
RunOutput estimate_once(const ExperimentConfig& cfg, Command cmd, std::uint64_t seed, std::size_t run) {
    const auto& al = cfg.algorithm;
    RunOutput out;
    out.record.run = run;
    out.record.algorithm = algorithm_name(cmd);
    out.record.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const double c0 = thread_cpu_seconds();

    with_model(cfg, [&](auto factory) {
        auto take = [&](EstimateRun r) {
            out.record.thresholds = r.thresholds;
            out.record.probabilities = r.stage_probabilities;
            out.record.no_target = r.no_target;
            out.record.nofc = r.nofc;
            r.partition.config_hash = cfg.hash;
            r.partition.seed = seed;
            out.partition.emplace(std::move(r.partition));
        };
        switch (cmd) {
            case Command::estimate_basic: {
                BasicConfig bc;
                bc.m = al.m_ft;
                bc.stop = al.stop;
                take(run_basic(cfg.space(), factory, bc, seed, run));
                break;
            }
            case Command::estimate_dips: {
                DipsConfig dc;
                dc.s = al.s;
                dc.q = al.q;
                dc.schedule = FiltrationSchedule{al.schedule_ft};
                dc.lambda = al.lambda_ft;
                dc.stop = al.stop;
                take(run_dips(cfg.space(), factory, dc, seed, run));
                break;
            }
            case Command::estimate_outer_mu: {
                OuterMuConfig oc;
                oc.s = al.s;
                oc.q = al.q;
                oc.m = al.m_ft;
                oc.lambda = al.lambda_ft;
                oc.stop = al.stop;
                take(run_outer_mu(cfg.space(), factory, oc, seed, run));
                break;
            }
            case Command::estimate_ips_fixed: {
                const auto point = cfg.nominal_point();
                const auto model = factory(std::span<const double>(point));
                const FiltrationSchedule sched{al.schedule_ft};
                const auto r = run_fixed_ips(model, sched, al.s, rng::domain_key(seed, rng::Domain::particles, run));
                out.record.thresholds = sched.thresholds;
                out.record.probabilities = r.cumulative(sched.size());
                out.record.no_target = r.extinct;
                out.record.nofc = r.nofc;
                break;
            }
            case Command::estimate_ips_adaptive: {
                const auto point = cfg.nominal_point();
                const auto model = factory(std::span<const double>(point));
                const auto r = run_adaptive_ips(model, al.adaptive, rng::domain_key(seed, rng::Domain::particles, run));
                out.record.thresholds = r.thresholds;
                out.record.probabilities = r.cumulative(r.thresholds.size());
                if (out.record.thresholds.empty()) {
                    out.record.thresholds = {al.adaptive.target};
                    out.record.probabilities = {0.0};
                }
                out.record.no_target = r.probability == 0.0;
                out.record.nofc = r.nofc;
                break;
            }
            case Command::estimate_extrapolation: {
                LimitState ls = [factory](std::span<const double> x, rng::StreamKey key) {
                    const auto model = factory(x);
                    auto st = model.spawn(key);
                    model.advance(st, -std::numeric_limits<double>::infinity());
                    return model.distance(st);
                };
                auto ec = al.extrapolation;
                ec.m = al.m_ft;
                auto r = run_extrapolation(ls, cfg.space(), ec, seed, run);
                out.record.thresholds = {al.m_ft};
                out.record.probabilities = {r.probability};
                out.record.no_target = r.probability == 0.0;
                out.record.nofc = r.nofc;
                out.extrapolation.emplace(std::move(r));
                break;
            }
            default:
                throw UsageError("not an estimator command: " + algorithm_name(cmd));
        }
    });
    out.record.wall_s = seconds_since(t0);
    out.record.cpu_s = thread_cpu_seconds() - c0;
    return out;
}

CommandResult run_estimates(const ExperimentConfig& cfg, Command cmd, const fs::path& dir, std::uint64_t seed,
                            int workers, const CommandOptions& opt) {
    const std::size_t n = cfg.algorithm.n_runs;
    const std::string alg = algorithm_name(cmd);
    std::vector<std::optional<RunOutput>> outs(n);
    note(opt, alg + ": " + std::to_string(n) + " runs on " + std::to_string(workers) + " workers");
    // Runs are independent jobs; each fills its own slot.
    for_each_index(Execution::parallel, n, [&](std::size_t r) { outs[r].emplace(estimate_once(cfg, cmd, seed, r)); });

    CommandResult res;
    const Provenance prov{cfg.hash, seed};
    std::vector<TraceSeries> traces;
    for (const auto& o : outs) {
        res.records.push_back(o->record);
        if (o->partition) {
            traces.push_back({o->record.run, o->partition->probability_trace()});
            const auto path = dir / (alg + "_partition_run" + std::to_string(o->record.run) + ".txt");
            auto os = open_out(path);
            write_partition(os, *o->partition, cfg.space());
            res.artifacts.push_back(path.string());
        }
        if (o->record.no_target) res.warnings.push_back(alg + " run " + std::to_string(o->record.run) + ": no target found (P = 0)");
    }
    {
        const auto path = dir / (alg + "_runs.csv");
        auto os = open_out(path);
        write_runs_csv(os, prov, res.records);
        res.artifacts.push_back(path.string());
    }
    {
        const auto path = dir / (alg + "_run_timing.csv");
        auto os = open_out(path);
        write_run_timing_csv(os, prov, res.records, workers);
        res.artifacts.push_back(path.string());
    }
    if (!traces.empty()) {
        const auto path = dir / (alg + "_convergence_trace.csv");
        auto os = open_out(path);
        write_trace_csv(os, prov, traces);
        res.artifacts.push_back(path.string());
    }
    if (cmd == Command::estimate_extrapolation) {
        const auto path = dir / "extrapolation_points.csv";
        auto os = open_out(path);
        write_provenance(os, prov);
        os.precision(17);
        os << "schema,run,k,samples,hits,rho,beta,A,B,beta1\n";
        for (const auto& o : outs)
            for (const auto& p : o->extrapolation->points)
                os << "extrapolation.v1," << o->record.run << "," << p.k << "," << p.samples << "," << p.hits << ","
                   << p.rho << "," << (p.beta ? full_precision(*p.beta) : "NA") << "," << o->extrapolation->A
                   << "," << o->extrapolation->B << "," << o->extrapolation->beta1 << "\n";
        res.artifacts.push_back(path.string());
    }
    return res;
}

CommandResult run_simulate(const ExperimentConfig& cfg, const fs::path& dir, std::uint64_t seed,
                           const CommandOptions& opt) {
    auto point = opt.point.empty() ? cfg.nominal_point() : opt.point;
    if (point.size() != cfg.parameters.size())
        throw UsageError("simulate: point needs " + std::to_string(cfg.parameters.size()) + " values");
    CommandResult res;
    const Provenance prov{cfg.hash, seed};
    const auto key = rng::domain_key(seed, rng::Domain::turbulence, 0);
    const auto path = dir / "trajectory.csv";
    auto os = open_out(path);
    write_provenance(os, prov);
    if (cfg.model == ModelKind::aircraft) {
        const auto dist = disturbance_from(cfg.parameter_names(), point, cfg.turbulence);
        const auto tr = simulate(cfg.scenario, dist, key, cfg.algorithm.schedule_ft, true);
        write_trajectory_csv(os, tr);
        note(opt, "simulate: " + to_string(tr.reason) + ", d = " + std::to_string(tr.miss_distance) + " ft");
        const auto spath = dir / "simulate_summary.csv";
        auto ss = open_out(spath);
        write_provenance(ss, prov);
        ss << "schema,reason,miss_distance_ft,duration_s,threshold_ft,first_passage_s\n";
        const double duration = tr.samples.empty() ? 0.0 : tr.samples.back().t_s;
        for (std::size_t l = 0; l < tr.thresholds.size(); ++l)
            ss << "simulate.v1," << to_string(tr.reason) << "," << full_precision(tr.miss_distance) << ","
               << full_precision(duration) << "," << full_precision(tr.thresholds[l]) << ","
               << (tr.passage_times[l] ? full_precision(*tr.passage_times[l]) : "NA") << "\n";
        res.artifacts.push_back(spath.string());
        RunRecord r{0, "simulate", seed, 0.0, 0.0, 1, false, {0.0}, {tr.miss_distance}};
        res.records.push_back(r);
    } else {
        double d = 0.0;
        with_model(cfg, [&](auto factory) {
            const auto model = factory(std::span<const double>(point));
            auto st = model.spawn(key);
            model.advance(st, -std::numeric_limits<double>::infinity());
            d = model.distance(st);
        });
        os.precision(17);
        os << "schema,distance\nsimulate.v1," << d << "\n";
        note(opt, "simulate: d = " + std::to_string(d));
        res.records.push_back(RunRecord{0, "simulate", seed, 0.0, 0.0, 1, false, {0.0}, {d}});
    }
    res.artifacts.push_back(path.string());
    return res;
}

std::vector<fs::path> files_matching(const fs::path& dir, const std::regex& re) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && std::regex_match(e.path().filename().string(), re)) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

CommandResult run_reweight(const ExperimentConfig& cfg, const fs::path& dir, std::uint64_t seed,
                           const CommandOptions& opt) {
    std::vector<fs::path> inputs(opt.inputs.begin(), opt.inputs.end());
    if (inputs.empty()) inputs = files_matching(dir, std::regex(R"(.*_partition_run\d+\.txt)"));
    if (inputs.empty()) throw UsageError("reweight: no partition files in " + dir.string());
    const auto& u = cfg.uncertainty;

    CommandResult res;
    const Provenance prov{cfg.hash, seed};
    auto rw_os = open_out(dir / "reweight.csv");
    auto sens_os = open_out(dir / "sensitivity.csv");
    write_provenance(rw_os, prov);
    write_provenance(sens_os, prov);
    rw_os.precision(17);
    sens_os.precision(17);
    rw_os << "schema,partition,stage,threshold,original,reweighted,escaped_mass,warning\n";
    sens_os << "schema,partition,parameter,moment,step,rate,p_plus,p_minus\n";
    std::optional<std::ofstream> corner_os;
    if (!u.ranges.empty()) {
        corner_os.emplace(open_out(dir / "corners.csv"));
        write_provenance(*corner_os, prov);
        corner_os->precision(17);
        *corner_os << "schema,partition,corner,setting,p_final\n";
    }

    std::vector<RunRecord> original, reweighted;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::ifstream hs(inputs[i]);
        if (!hs) throw UsageError("reweight: cannot read " + inputs[i].string());
        const auto space = space_from_header(read_partition_header(hs));
        std::ifstream ps(inputs[i]);
        const auto part = read_partition(ps);
        const auto name = inputs[i].filename().string();
        const auto before = partition_probabilities(part);
        const auto after = reweight(part, space, u.perturbations, u.escaped_warning);
        auto th = part.stage_thresholds;
        if (th.size() != before.size()) th.assign(before.size(), part.mode().m);
        for (std::size_t l = 0; l < before.size(); ++l)
            rw_os << "reweight.v1," << name << "," << l << "," << th[l] << "," << before[l] << ","
                  << after.stage_probabilities[l] << "," << after.escaped_mass << ","
                  << (after.escaped_warning ? 1 : 0) << "\n";
        if (after.escaped_warning) res.warnings.push_back(name + ": " + after.warning);
        original.push_back(RunRecord{i, "original", part.seed, 0.0, 0.0, part.nofc(), false, th, before});
        reweighted.push_back(RunRecord{i, "reweighted", part.seed, 0.0, 0.0, 0, false, th, after.stage_probabilities});

        const auto targets = all_moments(space);
        for (const auto& s : sensitivity(part, space, targets, u.sensitivity_step))
            sens_os << "sensitivity.v1," << name << "," << s.parameter << "," << to_string(s.moment) << "," << s.step
                    << "," << s.rate << "," << s.p_plus.back() << "," << s.p_minus.back() << "\n";
        if (corner_os) {
            const auto corners = corner_search(part, space, u.ranges);
            for (std::size_t c = 0; c < corners.size(); ++c) {
                std::string setting;
                for (const auto& p : corners[c].perturbations)
                    setting += (setting.empty() ? "" : " ") + p.parameter + "." + to_string(p.moment) + "=" +
                               std::to_string(p.value);
                *corner_os << "corners.v1," << name << "," << c << "," << setting << ","
                           << corners[c].result.stage_probabilities.back() << "\n";
            }
        }
    }
    res.artifacts.push_back((dir / "reweight.csv").string());
    res.artifacts.push_back((dir / "sensitivity.csv").string());
    if (corner_os) res.artifacts.push_back((dir / "corners.csv").string());
    if (inputs.size() >= 2) {
        for (auto* set : {&original, &reweighted}) {
            const auto rows = interval_table(*set, cfg.algorithm.ci_level, cfg.algorithm.tls);
            const auto path = dir / ("reweight_" + set->front().algorithm + "_intervals.csv");
            auto os = open_out(path);
            write_intervals_csv(os, prov, rows);
            res.artifacts.push_back(path.string());
        }
    }
    res.records = reweighted;
    note(opt, "reweight: " + std::to_string(inputs.size()) + " partitions");
    return res;
}

}  // namespace

CommandResult write_reports(const std::string& dir_name, const ExperimentConfig& cfg, const CommandOptions& opt) {
    const fs::path dir(dir_name);
    const std::uint64_t seed = opt.seed.value_or(cfg.seed);
    const bool svg = opt.svg.value_or(cfg.output.svg);
    CommandResult res;
    std::vector<fs::path> runs_files;
    for (const auto& in : opt.inputs) runs_files.emplace_back(in);
    if (runs_files.empty()) runs_files = files_matching(dir, std::regex(R"([a-z_]+_runs\.csv)"));
    if (runs_files.empty()) throw UsageError("report: no run files in " + dir.string());

    std::vector<RunRecord> all;
    int workers = 1;
    Provenance prov{cfg.hash, seed};
    for (const auto& rf : runs_files) {
        std::ifstream is(rf);
        if (!is) throw UsageError("report: cannot read " + rf.string());
        prov = read_provenance(is);
        auto records = read_runs_csv(is);
        if (records.empty()) continue;
        const std::string alg = records.front().algorithm;
        const auto base = rf.parent_path();
        if (std::ifstream ts(base / (alg + "_run_timing.csv")); ts) {
            read_provenance(ts);
            workers = read_run_timing_csv(ts, records);
        }
        const auto rows = interval_table(records, cfg.algorithm.ci_level, cfg.algorithm.tls);
        {
            const auto path = dir / (alg + "_intervals.csv");
            auto os = open_out(path);
            write_intervals_csv(os, prov, rows);
            res.artifacts.push_back(path.string());
        }
        for (const auto& row : rows)
            if (row.skew_flag)
                res.warnings.push_back(alg + " stage " + std::to_string(row.stage) +
                                       ": skewed sample, lower limit unreliable");
        if (svg) {
            const auto path = dir / (alg + "_stages.svg");
            auto os = open_out(path);
            write_stage_svg(os, prov, records, rows);
            res.artifacts.push_back(path.string());
            if (std::ifstream ts(base / (alg + "_convergence_trace.csv")); ts) {
                read_provenance(ts);
                const auto traces = read_trace_csv(ts);
                const auto cpath = dir / (alg + "_convergence.svg");
                auto cos = open_out(cpath);
                write_convergence_svg(cos, prov, traces);
                res.artifacts.push_back(cpath.string());
            }
        }
        all.insert(all.end(), records.begin(), records.end());
    }
    const auto rows = timing_report(all, workers, dims_descriptor(cfg));
    const auto path = dir / "timing.csv";
    auto os = open_out(path);
    write_timing_csv(os, prov, rows);
    res.artifacts.push_back(path.string());
    res.records = std::move(all);
    return res;
}

CommandResult run_command(const ExperimentConfig& cfg, Command cmd, const CommandOptions& opt) {
    const fs::path dir(opt.out_dir.value_or(cfg.output.directory));
    fs::create_directories(dir);
    const std::uint64_t seed = opt.seed.value_or(cfg.seed);
    const int workers = opt.workers > 0 ? opt.workers : cfg.workers;
    set_worker_count(workers);
    const int active = worker_count();

    switch (cmd) {
        case Command::simulate: return run_simulate(cfg, dir, seed, opt);
        case Command::reweight: return run_reweight(cfg, dir, seed, opt);
        case Command::report: return write_reports(dir.string(), cfg, opt);
        default: break;
    }
    if (cmd != Command::estimate_ips_fixed && cmd != Command::estimate_ips_adaptive && cfg.parameters.empty())
        throw UsageError(algorithm_name(cmd) + ": model has no stochastic parameters to search");
    auto res = run_estimates(cfg, cmd, dir, seed, active, opt);
    CommandOptions ropt = opt;
    ropt.inputs = {(dir / (algorithm_name(cmd) + "_runs.csv")).string()};
    auto rep = write_reports(dir.string(), cfg, ropt);
    res.artifacts.insert(res.artifacts.end(), rep.artifacts.begin(), rep.artifacts.end());
    res.warnings.insert(res.warnings.end(), rep.warnings.begin(), rep.warnings.end());
    return res;
}

}  // namespace dips
