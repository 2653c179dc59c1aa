#pragma once

// Result files and post-processing tables. Every artifact starts with a
// provenance line "# config_hash=<hex> seed=<n>" and every CSV carries a
// schema column naming its layout version.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dips/uncertainty.hpp"

namespace dips {

struct Provenance {
    std::string config_hash = "-";
    std::uint64_t seed = 0;
};

void write_provenance(std::ostream& os, const Provenance& p);
Provenance read_provenance(std::istream& is);   // consumes the line

struct RunRecord {
    std::size_t run = 0;
    std::string algorithm;
    std::uint64_t seed = 0;
    double wall_s = 0.0;
    double cpu_s = 0.0;     // CPU time of the thread that ran it
    std::uint64_t nofc = 0;
    bool no_target = false;
    std::vector<double> thresholds;
    std::vector<double> probabilities;   // one per threshold
};

// runs.csv holds only deterministic fields; wall times go to timing files.
void write_runs_csv(std::ostream& os, const Provenance& p, std::span<const RunRecord> records);
std::vector<RunRecord> read_runs_csv(std::istream& is);

void write_run_timing_csv(std::ostream& os, const Provenance& p, std::span<const RunRecord> records, int workers);
// Fills wall_s and cpu_s of matching (algorithm, run) records; returns the worker count.
int read_run_timing_csv(std::istream& is, std::vector<RunRecord>& records);

struct TraceSeries {
    std::size_t run = 0;
    std::vector<double> values;   // p_k after each evaluation
};

void write_trace_csv(std::ostream& os, const Provenance& p, std::span<const TraceSeries> series);
std::vector<TraceSeries> read_trace_csv(std::istream& is);

struct IntervalRow {
    std::size_t stage = 0;
    double threshold = 0.0;
    std::size_t runs = 0;        // runs with P > 0 used in the interval
    std::size_t zero_runs = 0;
    bool valid = false;          // at least two positive runs
    double geometric_mean = 0.0;
    double sample_mean = 0.0;
    double lognormal_mean = 0.0;
    double log_sd = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double upper_clamped = 0.0;
    double dispersion = 0.0;
    double skewness = 0.0;
    bool skew_flag = false;
    Verdict verdict = Verdict::indeterminate;
};

// One row per stage when all runs share thresholds, else one final row.
std::vector<IntervalRow> interval_table(std::span<const RunRecord> records, double level, double tls);
void write_intervals_csv(std::ostream& os, const Provenance& p, std::span<const IntervalRow> rows);

struct TimingRow {
    std::string algorithm;
    std::string dims;
    std::size_t runs = 0;
    std::uint64_t nofc = 0;
    double wall_s = 0.0;
    int workers = 1;
    double core_s = 0.0;   // single-core equivalent: summed run CPU time
};

// Rows grouped by algorithm, ordered by core_s.
std::vector<TimingRow> timing_report(std::span<const RunRecord> records, int workers, const std::string& dims);
void write_timing_csv(std::ostream& os, const Provenance& p, std::span<const TimingRow> rows);

// Static plots.
void write_convergence_svg(std::ostream& os, const Provenance& p, std::span<const TraceSeries> series);
void write_stage_svg(std::ostream& os, const Provenance& p, std::span<const RunRecord> records,
                     std::span<const IntervalRow> rows);

}  // namespace dips
