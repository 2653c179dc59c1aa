#include "dips/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "dips/errors.hpp"
#include "dips/stats.hpp"

namespace dips {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(line);
    while (std::getline(is, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Reads rows of a CSV whose header starts with "schema"; checks the schema id.
std::vector<std::vector<std::string>> read_rows(std::istream& is, const std::string& schema, std::size_t width) {
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("schema,", 0) != 0) throw UsageError(schema + ": missing header line");
            header = true;
            continue;
        }
        auto f = fields(line);
        if (f.size() != width || f[0] != schema)
            throw UsageError(schema + ": malformed row '" + line + "'");
        rows.push_back(std::move(f));
    }
    return rows;
}

double to_d(const std::string& s) { return std::stod(s); }
std::uint64_t to_u(const std::string& s) { return std::stoull(s); }

}  // namespace

void write_provenance(std::ostream& os, const Provenance& p) {
    os << "# config_hash=" << (p.config_hash.empty() ? "-" : p.config_hash) << " seed=" << p.seed << "\n";
}

Provenance read_provenance(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# config_hash=", 0) != 0)
        throw UsageError("artifact lacks a provenance line");
    Provenance p;
    std::istringstream ls(line.substr(2));
    std::string tok;
    while (ls >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "config_hash") p.config_hash = val;
        if (key == "seed") p.seed = std::stoull(val);
    }
    return p;
}

void write_runs_csv(std::ostream& os, const Provenance& p, std::span<const RunRecord> records) {
    write_provenance(os, p);
    os << "schema,algorithm,run,seed,nofc,no_target,stage,threshold,probability\n";
    for (const auto& r : records) {
        for (std::size_t l = 0; l < r.probabilities.size(); ++l)
            os << "runs.v1," << r.algorithm << "," << r.run << "," << r.seed << "," << r.nofc << ","
               << (r.no_target ? 1 : 0) << "," << l << "," << num(r.thresholds.at(l)) << ","
               << num(r.probabilities[l]) << "\n";
    }
}

std::vector<RunRecord> read_runs_csv(std::istream& is) {
    std::vector<RunRecord> out;
    for (const auto& f : read_rows(is, "runs.v1", 9)) {
        const std::size_t run = std::stoull(f[2]);
        if (out.empty() || out.back().run != run || out.back().algorithm != f[1]) {
            RunRecord r;
            r.algorithm = f[1];
            r.run = run;
            r.seed = to_u(f[3]);
            r.nofc = to_u(f[4]);
            r.no_target = f[5] == "1";
            out.push_back(r);
        }
        out.back().thresholds.push_back(to_d(f[7]));
        out.back().probabilities.push_back(to_d(f[8]));
    }
    return out;
}

void write_run_timing_csv(std::ostream& os, const Provenance& p, std::span<const RunRecord> records, int workers) {
    write_provenance(os, p);
    os << "schema,algorithm,run,wall_s,cpu_s,nofc,workers\n";
    for (const auto& r : records)
        os << "run_timing.v1," << r.algorithm << "," << r.run << "," << num(r.wall_s) << "," << num(r.cpu_s) << ","
           << r.nofc << "," << workers << "\n";
}

int read_run_timing_csv(std::istream& is, std::vector<RunRecord>& records) {
    int workers = 1;
    for (const auto& f : read_rows(is, "run_timing.v1", 7)) {
        const std::size_t run = std::stoull(f[2]);
        for (auto& r : records)
            if (r.algorithm == f[1] && r.run == run) {
                r.wall_s = to_d(f[3]);
                r.cpu_s = to_d(f[4]);
            }
        workers = std::stoi(f[6]);
    }
    return workers;
}

void write_trace_csv(std::ostream& os, const Provenance& p, std::span<const TraceSeries> series) {
    write_provenance(os, p);
    os << "schema,run,eval,probability\n";
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.values.size(); ++k)
            os << "trace.v1," << s.run << "," << k + 1 << "," << num(s.values[k]) << "\n";
}

std::vector<TraceSeries> read_trace_csv(std::istream& is) {
    std::vector<TraceSeries> out;
    for (const auto& f : read_rows(is, "trace.v1", 4)) {
        const std::size_t run = std::stoull(f[1]);
        if (out.empty() || out.back().run != run) out.push_back({run, {}});
        out.back().values.push_back(to_d(f[3]));
    }
    return out;
}

std::vector<IntervalRow> interval_table(std::span<const RunRecord> records, double level, double tls) {
    std::vector<IntervalRow> rows;
    if (records.empty()) return rows;
    bool shared = true;
    for (const auto& r : records)
        if (r.thresholds != records.front().thresholds) shared = false;
    const std::size_t stages = shared ? records.front().probabilities.size() : 1;

    for (std::size_t l = 0; l < stages; ++l) {
        IntervalRow row;
        row.stage = shared ? l : 0;
        row.threshold = shared ? records.front().thresholds[l] : records.front().thresholds.back();
        std::vector<double> pos;
        double sum = 0.0;
        for (const auto& r : records) {
            const double v = shared ? r.probabilities[l] : r.probabilities.back();
            sum += v;
            if (v > 0.0) pos.push_back(v);
            else ++row.zero_runs;
        }
        row.runs = pos.size();
        row.sample_mean = sum / static_cast<double>(records.size());
        if (pos.size() >= 2) {
            const auto s = summarize(pos);
            const auto ci = log_ci(pos, level);
            row.valid = true;
            row.geometric_mean = std::exp(s.log_mean);
            row.lognormal_mean = s.lognormal_mean;
            row.log_sd = s.log_sd;
            row.lower = ci.lower;
            row.upper = ci.upper;
            row.dispersion = dispersion(pos, level);
            row.skewness = s.skewness;
            row.skew_flag = s.skewness > kSkewnessFlag;
            row.verdict = tls_verdict(ci.lower, ci.upper, tls);
        }
        rows.push_back(row);
    }
    // Upper limits may not rise as the threshold tightens.
    if (rows.size() > 1) {
        std::vector<double> up, th;
        for (const auto& r : rows) {
            up.push_back(r.valid ? r.upper : 1.0);
            th.push_back(r.threshold);
        }
        const auto c = clamp_quantiles(up, th);
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i].upper_clamped = rows[i].valid ? c[i] : 0.0;
    } else {
        for (auto& r : rows) r.upper_clamped = std::min(r.upper, 1.0);
    }
    return rows;
}

void write_intervals_csv(std::ostream& os, const Provenance& p, std::span<const IntervalRow> rows) {
    write_provenance(os, p);
    os << "schema,stage,threshold,runs,zero_runs,valid,geometric_mean,sample_mean,lognormal_mean,log_sd,lower,upper,"
          "upper_clamped,dispersion,skewness,skew_flag,verdict\n";
    for (const auto& r : rows)
        os << "intervals.v1," << r.stage << "," << num(r.threshold) << "," << r.runs << "," << r.zero_runs << ","
           << (r.valid ? 1 : 0) << "," << num(r.geometric_mean) << "," << num(r.sample_mean) << ","
           << num(r.lognormal_mean) << "," << num(r.log_sd) << "," << num(r.lower) << "," << num(r.upper) << ","
           << num(r.upper_clamped) << "," << num(r.dispersion) << "," << num(r.skewness) << ","
           << (r.skew_flag ? 1 : 0) << "," << (r.valid ? to_string(r.verdict) : "NA") << "\n";
}

std::vector<TimingRow> timing_report(std::span<const RunRecord> records, int workers, const std::string& dims) {
    std::map<std::string, TimingRow> by_alg;
    for (const auto& r : records) {
        auto& row = by_alg[r.algorithm];
        row.algorithm = r.algorithm;
        row.dims = dims;
        row.runs += 1;
        row.nofc += r.nofc;
        row.wall_s += r.wall_s;
        row.core_s += r.cpu_s;
    }
    std::vector<TimingRow> rows;
    for (auto& [_, row] : by_alg) {
        row.workers = std::max(workers, 1);
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const TimingRow& a, const TimingRow& b) { return a.core_s < b.core_s; });
    return rows;
}

void write_timing_csv(std::ostream& os, const Provenance& p, std::span<const TimingRow> rows) {
    write_provenance(os, p);
    os << "schema,algorithm,dims,runs,nofc,wall_s,workers,core_s\n";
    for (const auto& r : rows)
        os << "timing.v1," << r.algorithm << "," << r.dims << "," << r.runs << "," << r.nofc << "," << num(r.wall_s)
           << "," << r.workers << "," << num(r.core_s) << "\n";
}

// ---------------------------------------------------------------------------
// SVG

namespace {

struct Frame {
    double x0, x1, y0, y1;   // data ranges; y in log10
    double W = 640, H = 420, L = 70, R = 20, T = 30, B = 50;

    double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
    double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

void svg_open(std::ostream& os, const Provenance& p, const Frame& f, const std::string& title) {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<!-- config_hash=" << p.config_hash << " seed=" << p.seed << " -->\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.W << "\" height=\"" << f.H
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << f.W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
}

void svg_axes(std::ostream& os, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    os << "<rect x=\"" << f.L << "\" y=\"" << f.T << "\" width=\"" << f.W - f.L - f.R << "\" height=\""
       << f.H - f.T - f.B << "\" fill=\"none\" stroke=\"black\"/>\n";
    const int ylo = static_cast<int>(std::ceil(f.y0)), yhi = static_cast<int>(std::floor(f.y1));
    const int ystep = std::max(1, (yhi - ylo) / 8);
    for (int e = ylo; e <= yhi; e += ystep) {
        os << "<line x1=\"" << f.L << "\" x2=\"" << f.W - f.R << "\" y1=\"" << f.py(e) << "\" y2=\"" << f.py(e)
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << f.L - 6 << "\" y=\"" << f.py(e) + 4 << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double x = f.x0 + (f.x1 - f.x0) * i / 5.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", x);
        os << "<text x=\"" << f.px(x) << "\" y=\"" << f.H - f.B + 16 << "\" text-anchor=\"middle\">" << buf
           << "</text>\n";
    }
    os << "<text x=\"" << (f.L + f.W - f.R) / 2 << "\" y=\"" << f.H - 12 << "\" text-anchor=\"middle\">" << xlabel
       << "</text>\n";
    os << "<text transform=\"translate(16," << (f.T + f.H - f.B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << ylabel << "</text>\n";
}

const char* palette(std::size_t i) {
    static const char* c[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return c[i % 10];
}

void log_range(double lo, double hi, Frame& f) {
    if (!(lo > 0.0)) lo = 1e-20;
    if (!(hi > 0.0)) hi = 1.0;
    f.y0 = std::floor(std::log10(lo));
    f.y1 = std::ceil(std::log10(hi));
    if (f.y1 <= f.y0) f.y1 = f.y0 + 1;
}

}  // namespace

void write_convergence_svg(std::ostream& os, const Provenance& p, std::span<const TraceSeries> series) {
    double lo = INFINITY, hi = 0.0;
    std::size_t n = 1;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values)
            if (v > 0.0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    Frame f{0.0, static_cast<double>(n), 0, 1};
    log_range(lo, hi, f);
    svg_open(os, p, f, "Probability estimate vs. evaluations");
    svg_axes(os, f, "centroid evaluations", "P");
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& v = series[i].values;
        const std::size_t stride = std::max<std::size_t>(1, v.size() / 600);
        os << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << palette(i) << "\" points=\"";
        for (std::size_t k = 0; k < v.size(); k += stride)
            if (v[k] > 0.0) os << f.px(static_cast<double>(k + 1)) << "," << f.py(std::log10(v[k])) << " ";
        if (!v.empty() && v.back() > 0.0)
            os << f.px(static_cast<double>(v.size())) << "," << f.py(std::log10(v.back()));
        os << "\"/>\n";
    }
    os << "</svg>\n";
}

void write_stage_svg(std::ostream& os, const Provenance& p, std::span<const RunRecord> records,
                     std::span<const IntervalRow> rows) {
    double lo = INFINITY, hi = 0.0, x0 = INFINITY, x1 = -INFINITY;
    for (const auto& r : records)
        for (std::size_t l = 0; l < r.probabilities.size(); ++l) {
            x0 = std::min(x0, r.thresholds[l]);
            x1 = std::max(x1, r.thresholds[l]);
            if (r.probabilities[l] > 0.0) {
                lo = std::min(lo, r.probabilities[l]);
                hi = std::max(hi, r.probabilities[l]);
            }
        }
    for (const auto& row : rows)
        if (row.valid) {
            lo = std::min(lo, row.lower);
            hi = std::max(hi, row.upper_clamped);
        }
    if (!(x1 > x0)) {
        x0 -= 1.0;
        x1 += 1.0;
    }
    Frame f{x0, x1, 0, 1};
    log_range(lo, hi, f);
    svg_open(os, p, f, "Per-stage probability vs. threshold");
    svg_axes(os, f, "threshold m", "P(d <= m)");
    for (const auto& r : records)
        for (std::size_t l = 0; l < r.probabilities.size(); ++l)
            if (r.probabilities[l] > 0.0)
                os << "<circle r=\"2\" fill=\"#999\" cx=\"" << f.px(r.thresholds[l]) << "\" cy=\""
                   << f.py(std::log10(r.probabilities[l])) << "\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& row : rows)
        if (row.valid) os << f.px(row.threshold) << "," << f.py(std::log10(row.geometric_mean)) << " ";
    os << "\"/>\n";
    for (const auto& row : rows) {
        if (!row.valid) continue;
        const double x = f.px(row.threshold);
        os << "<line stroke=\"#d62728\" x1=\"" << x << "\" x2=\"" << x << "\" y1=\"" << f.py(std::log10(row.lower))
           << "\" y2=\"" << f.py(std::log10(row.upper_clamped)) << "\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace dips
