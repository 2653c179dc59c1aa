#include "dips/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dips {

namespace pt = boost::property_tree;

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::aircraft: return "aircraft";
        case ModelKind::gaussian_corner: return "gaussian_corner";
        case ModelKind::linear: return "linear";
        case ModelKind::no_target: return "no_target";
        case ModelKind::camel: return "camel";
        case ModelKind::sde_toy: return "sde_toy";
        case ModelKind::gaussian_sweep: return "gaussian_sweep";
        case ModelKind::noisy_threshold: return "noisy_threshold";
    }
    return "?";
}

namespace {

std::string join_lines(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& p : v) s += "\n  " + p;
    return s;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::optional<double> to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (trim(s.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

// Reads one section, remembering which keys were consumed so that the rest
// can be reported as unknown.
class Section {
public:
    Section(const pt::ptree* tree, std::string name, std::vector<std::string>& errors)
        : tree_(tree), name_(std::move(name)), errors_(errors) {}

    bool present() const { return tree_ != nullptr; }
    std::string path(const std::string& key) const { return name_ + "." + key; }

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        const auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        std::string v = trim(it->second.data());
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        return v;
    }

    void number(const std::string& key, double& out) {
        if (auto r = raw(key)) {
            if (auto v = to_double(*r)) out = *v;
            else error(key, "expected a number, got '" + *r + "'");
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (auto r = raw(key)) {
            const auto v = to_double(*r);
            if (!v || *v < 0 || std::floor(*v) != *v) error(key, "expected a non-negative integer, got '" + *r + "'");
            else out = static_cast<Int>(*v);
        }
    }

    void flag(const std::string& key, bool& out) {
        if (auto r = raw(key)) {
            if (*r == "true" || *r == "yes" || *r == "1") out = true;
            else if (*r == "false" || *r == "no" || *r == "0") out = false;
            else error(key, "expected true or false, got '" + *r + "'");
        }
    }

    void text(const std::string& key, std::string& out) {
        if (auto r = raw(key)) out = *r;
    }

    void list(const std::string& key, std::vector<double>& out) {
        if (auto r = raw(key)) {
            std::vector<double> v;
            for (const auto& item : split(*r, ',')) {
                if (auto d = to_double(item)) v.push_back(*d);
                else {
                    error(key, "bad list element '" + item + "'");
                    return;
                }
            }
            out = v;
        }
    }

    // Groups of numbers: "a b c; d e f".
    std::optional<std::vector<std::vector<double>>> rows(const std::string& key, std::size_t width) {
        auto r = raw(key);
        if (!r) return std::nullopt;
        std::vector<std::vector<double>> out;
        for (const auto& row : split(*r, ';')) {
            std::vector<double> vals;
            std::istringstream is(row);
            std::string tok;
            while (is >> tok) {
                auto d = to_double(tok);
                if (!d) {
                    error(key, "bad number '" + tok + "'");
                    return std::nullopt;
                }
                vals.push_back(*d);
            }
            if (vals.size() != width) {
                error(key, "each entry needs " + std::to_string(width) + " numbers");
                return std::nullopt;
            }
            out.push_back(vals);
        }
        return out;
    }

    void error(const std::string& key, const std::string& msg) { errors_.push_back(path(key) + ": " + msg); }

    void check_unknown() {
        if (!tree_) return;
        for (const auto& kv : *tree_)
            if (!used_.count(kv.first)) errors_.push_back(path(kv.first) + ": unknown key");
    }

private:
    const pt::ptree* tree_;
    std::string name_;
    std::vector<std::string>& errors_;
    std::set<std::string> used_;
};

const std::map<std::string, ModelKind>& model_names() {
    static const std::map<std::string, ModelKind> m{
        {"aircraft", ModelKind::aircraft},
        {"gaussian_corner", ModelKind::gaussian_corner},
        {"linear", ModelKind::linear},
        {"no_target", ModelKind::no_target},
        {"camel", ModelKind::camel},
        {"sde_toy", ModelKind::sde_toy},
        {"gaussian_sweep", ModelKind::gaussian_sweep},
        {"noisy_threshold", ModelKind::noisy_threshold},
    };
    return m;
}

// Runs a module validator, recording its message against `where`.
template <class F>
void check(std::vector<std::string>& errors, const std::string& where, F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        errors.push_back(where + ": " + e.what());
    }
}

void read_parameter(const std::string& name, Section& sec, ExperimentConfig& cfg, std::vector<std::string>& errors) {
    std::string dist = "normal";
    sec.text("dist", dist);
    ParameterConfig pc{name, "", StochasticParameter{name, Normal{}, 0.0, 1.0}};
    sec.text("unit", pc.unit);
    double mean = 0.0, sigma = 1.0, tail = kDefaultTruncationMass;
    std::optional<double> lo, hi;
    sec.number("mean", mean);
    sec.number("sigma", sigma);
    sec.number("truncation_mass", tail);
    if (auto r = sec.raw("lo")) {
        if (auto v = to_double(*r)) lo = v;
        else sec.error("lo", "expected a number");
    }
    if (auto r = sec.raw("hi")) {
        if (auto v = to_double(*r)) hi = v;
        else sec.error("hi", "expected a number");
    }
    if (dist != "normal" && dist != "exponential") {
        sec.error("dist", "expected normal or exponential, got '" + dist + "'");
        return;
    }
    if (dist == "normal" && !(sigma > 0.0)) {
        sec.error("sigma", "must be > 0");
        return;
    }
    if (dist == "exponential" && !(mean > 0.0)) {
        sec.error("mean", "must be > 0");
        return;
    }
    const Distribution d = dist == "normal" ? Distribution(Normal{mean, sigma}) : Distribution(Exponential{mean});
    check(errors, "param." + name, [&] {
        auto p = StochasticParameter::truncated(name, d, tail);
        if (lo) p.search_lo = *lo;
        if (hi) p.search_hi = *hi;
        pc.param = StochasticParameter::bounded(name, d, p.search_lo, p.search_hi);
        cfg.parameters.push_back(pc);
    });
}

std::optional<MomentRange> parse_range(const std::string& text) {
    // name.moment:lo:hi
    const auto parts = split(text, ':');
    if (parts.size() != 3) return std::nullopt;
    const auto dot = parts[0].find('.');
    if (dot == std::string::npos) return std::nullopt;
    MomentRange r;
    r.parameter = parts[0].substr(0, dot);
    const auto m = parts[0].substr(dot + 1);
    if (m == "mean") r.moment = Moment::mean;
    else if (m == "stddev" || m == "sigma") r.moment = Moment::stddev;
    else return std::nullopt;
    auto lo = to_double(parts[1]), hi = to_double(parts[2]);
    if (!lo || !hi) return std::nullopt;
    r.lo = *lo;
    r.hi = *hi;
    return r;
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> problems)
    : ConfigError(join_lines(problems)), problems_(std::move(problems)) {}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

ParameterSpace ExperimentConfig::space() const {
    std::vector<StochasticParameter> p;
    for (const auto& pc : parameters) p.push_back(pc.param);
    return ParameterSpace(std::move(p));
}

std::vector<std::string> ExperimentConfig::parameter_names() const {
    std::vector<std::string> n;
    for (const auto& pc : parameters) n.push_back(pc.name);
    return n;
}

std::vector<double> ExperimentConfig::nominal_point() const {
    if (!algorithm.ips_point.empty()) return algorithm.ips_point;
    std::vector<double> x;
    for (const auto& pc : parameters) x.push_back(pc.param.dist.median());
    return x;
}

ExperimentConfig parse_config_text(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigValidationError({std::string("syntax: ") + e.message() + " (line " + std::to_string(e.line()) +
                                     ")"});
    }

    ExperimentConfig cfg;
    cfg.hash = fnv1a_hex(text);
    std::vector<std::string> errors;
    std::map<std::string, const pt::ptree*> sections;
    for (const auto& kv : tree) {
        if (kv.second.empty() && !kv.second.data().empty())
            errors.push_back(kv.first + ": key outside any section");
        else
            sections[kv.first] = &kv.second;
    }
    auto section = [&](const std::string& name) {
        const auto it = sections.find(name);
        return Section(it == sections.end() ? nullptr : it->second, name, errors);
    };

    // [experiment]
    {
        auto s = section("experiment");
        if (!s.present()) errors.push_back("experiment: section missing");
        s.text("name", cfg.name);
        std::string model = "aircraft";
        s.text("model", model);
        if (auto it = model_names().find(model); it != model_names().end()) cfg.model = it->second;
        else s.error("model", "unknown model '" + model + "'");
        s.integer("seed", cfg.seed);
        double w = 0;
        s.number("workers", w);
        if (w < 0) s.error("workers", "must be >= 0");
        cfg.workers = static_cast<int>(w);
        s.check_unknown();
    }

    // [scenario], [aircraft], [turbulence]
    {
        auto s = section("scenario");
        auto& sc = cfg.scenario;
        if (auto rows = s.rows("waypoints_nm_nm_ft", 3)) {
            sc.route.waypoints.clear();
            for (const auto& r : *rows) sc.route.waypoints.push_back({r[0], r[1], r[2]});
        }
        if (auto rows = s.rows("cones_nm_nm_nm_ft", 4)) {
            sc.terrain.cones.clear();
            for (const auto& r : *rows) sc.terrain.cones.push_back({r[0], r[1], r[2], r[3]});
        }
        s.number("terrain_base_ft", sc.terrain.base_ft);
        s.number("box_x_lo_nm", sc.route.box_x_lo_nm);
        s.number("box_x_hi_nm", sc.route.box_x_hi_nm);
        s.number("box_y_lo_nm", sc.route.box_y_lo_nm);
        s.number("box_y_hi_nm", sc.route.box_y_hi_nm);
        s.number("box_h_hi_ft", sc.route.box_h_hi_ft);
        s.number("max_time_s", sc.route.max_time_s);
        s.check_unknown();

        auto a = section("aircraft");
        auto& ac = sc.aircraft;
        a.number("tau_v_s", ac.tau_V_s);
        a.number("tau_psi_s", ac.tau_psi_s);
        a.number("tau_gamma_s", ac.tau_gamma_s);
        a.number("v_min_kt", ac.V_min_kt);
        a.number("v_max_kt", ac.V_max_kt);
        a.number("v_cruise_kt", ac.V_cruise_kt);
        a.number("gamma_climb_deg", ac.gamma_climb_deg);
        a.number("gamma_min_deg", ac.gamma_min_deg);
        a.number("turn_rate_deg_s", ac.turn_rate_deg_s);
        a.number("lookahead_nm", ac.lookahead_nm);
        a.number("altitude_time_s", ac.altitude_time_s);
        a.number("avoidance_margin_ft", ac.avoidance_margin_ft);
        a.number("dt_s", ac.dt_s);
        a.check_unknown();

        auto t = section("turbulence");
        t.flag("enabled", cfg.turbulence);
        double sigma = sc.dryden.sigma_u, length = sc.dryden.L_u;
        t.number("sigma_fps", sigma);
        t.number("length_ft", length);
        sc.dryden.sigma_u = sc.dryden.sigma_v = sc.dryden.sigma_w = sigma;
        sc.dryden.L_u = sc.dryden.L_v = sc.dryden.L_w = length;
        t.check_unknown();
        if (cfg.model == ModelKind::aircraft) check(errors, "scenario", [&] { sc.validate(); });
    }

    // [model]
    {
        auto s = section("model");
        auto& toy = cfg.toy;
        s.number("corner", toy.corner);
        s.number("scale_ft", toy.scale_ft);
        s.number("beta", toy.beta);
        s.number("barrier", toy.barrier);
        s.integer("steps", toy.steps);
        s.number("sweep_barrier", toy.sweep_barrier);
        s.number("threshold", toy.threshold);
        s.check_unknown();
        if (!(toy.scale_ft > 0.0)) s.error("scale_ft", "must be > 0");
        if (toy.steps < 1) s.error("steps", "must be >= 1");
    }

    // [param.<name>]
    for (const auto& [name, tree_ptr] : sections) {
        if (name.rfind("param.", 0) != 0) continue;
        const auto pname = name.substr(6);
        auto s = Section(tree_ptr, name, errors);
        read_parameter(pname, s, cfg, errors);
        s.check_unknown();
    }

    // [algorithm], [adaptive]
    {
        auto s = section("algorithm");
        auto& al = cfg.algorithm;
        s.integer("q", al.q);
        s.integer("s", al.s);
        s.integer("n_runs", al.n_runs);
        s.list("schedule_ft", al.schedule_ft);
        s.number("lambda_ft", al.lambda_ft);
        s.number("m_ft", al.m_ft);
        s.number("beta_skip", al.stop.beta_skip);
        s.number("eps_m", al.stop.eps_M);
        s.number("eps_hull", al.stop.eps_hull);
        s.integer("q_stable", al.stop.q_stable);
        s.flag("stability_rule", al.stop.use_stability_rule);
        s.integer("max_evals", al.stop.max_evals);
        s.number("ci_level", al.ci_level);
        s.number("tls", al.tls);
        s.list("k_grid", al.extrapolation.k_grid);
        s.integer("samples_per_k", al.extrapolation.samples_per_k);
        std::string form = "asymptotic";
        s.text("extrapolation_form", form);
        if (form == "asymptotic") al.extrapolation.form = FitForm::asymptotic;
        else if (form == "linear") al.extrapolation.form = FitForm::linear;
        else s.error("extrapolation_form", "expected asymptotic or linear");
        s.list("ips_point", al.ips_point);
        s.check_unknown();

        auto a = section("adaptive");
        a.number("initial_threshold_ft", al.adaptive.initial_threshold);
        a.number("target_ft", al.adaptive.target);
        a.integer("n_s", al.adaptive.n_s);
        a.integer("max_failures", al.adaptive.max_failures);
        a.number("min_gap_ft", al.adaptive.min_gap);
        a.number("enlarge_factor", al.adaptive.enlarge_factor);
        a.integer("max_trials_per_stage", al.adaptive.max_trials_per_stage);
        a.integer("max_restarts", al.adaptive.max_restarts);
        a.check_unknown();

        if (al.s < 1) s.error("s", "must be >= 1");
        if (al.q < 1) s.error("q", "must be >= 1");
        if (al.n_runs < 1) s.error("n_runs", "must be >= 1");
        if (!(al.ci_level > 0.0 && al.ci_level < 1.0)) s.error("ci_level", "must lie in (0, 1)");
        if (!(al.tls > 0.0 && al.tls < 1.0)) s.error("tls", "must lie in (0, 1)");
        if (!(al.lambda_ft > al.m_ft)) s.error("lambda_ft", "must exceed m_ft");
        check(errors, "algorithm.schedule_ft", [&] { FiltrationSchedule{al.schedule_ft}.validate(); });
        check(errors, "algorithm", [&] { al.stop.validate(); });
        check(errors, "algorithm", [&] { al.extrapolation.validate(); });
        check(errors, "adaptive", [&] { al.adaptive.validate(); });
        if (!al.ips_point.empty() && al.ips_point.size() != cfg.parameters.size())
            s.error("ips_point", "needs one value per parameter");
    }

    // [uncertainty]
    {
        auto s = section("uncertainty");
        auto& u = cfg.uncertainty;
        if (auto r = s.raw("perturbations")) {
            for (const auto& item : split(*r, ','))
                check(errors, s.path("perturbations"), [&] { u.perturbations.push_back(parse_perturbation(item)); });
        }
        if (auto r = s.raw("ranges")) {
            for (const auto& item : split(*r, ',')) {
                if (auto range = parse_range(item)) u.ranges.push_back(*range);
                else s.error("ranges", "malformed range '" + item + "', expected name.moment:lo:hi");
            }
        }
        s.number("sensitivity_step", u.sensitivity_step);
        s.number("escaped_warning", u.escaped_warning);
        s.check_unknown();
        if (!(u.sensitivity_step > 0.0)) s.error("sensitivity_step", "must be > 0");
        const auto names = cfg.parameter_names();
        auto known = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
        for (const auto& p : u.perturbations)
            if (!known(p.parameter)) s.error("perturbations", "unknown parameter '" + p.parameter + "'");
        for (const auto& r : u.ranges)
            if (!known(r.parameter)) s.error("ranges", "unknown parameter '" + r.parameter + "'");
    }

    // [output]
    {
        auto s = section("output");
        s.text("directory", cfg.output.directory);
        std::string format = "csv";
        s.text("format", format);
        if (format == "csv") cfg.output.svg = false;
        else if (format == "csv+svg") cfg.output.svg = true;
        else s.error("format", "expected csv or csv+svg");
        s.check_unknown();
    }

    static const std::set<std::string> known{"experiment", "scenario", "aircraft", "turbulence", "model",
                                             "algorithm", "adaptive", "uncertainty", "output"};
    for (const auto& [name, _] : sections)
        if (!known.count(name) && name.rfind("param.", 0) != 0) errors.push_back(name + ": unknown section");

    // Parameter count per model.
    const std::size_t n = cfg.parameters.size();
    switch (cfg.model) {
        case ModelKind::aircraft:
            for (const auto& pc : cfg.parameters)
                if (pc.name != "eps_h" && pc.name != "t_r" && pc.name != "w_x" && pc.name != "w_y")
                    errors.push_back("param." + pc.name + ": aircraft parameters are eps_h, t_r, w_x and w_y");
            if (n == 0) errors.push_back("parameters: aircraft model needs at least one parameter");
            break;
        case ModelKind::camel:
        case ModelKind::sde_toy:
        case ModelKind::noisy_threshold:
            if (n != 2) errors.push_back("parameters: model " + to_string(cfg.model) + " needs exactly 2 parameters");
            break;
        case ModelKind::gaussian_sweep:
            break;
        default:
            if (n == 0) errors.push_back("parameters: model " + to_string(cfg.model) + " needs parameters");
    }

    if (!errors.empty()) throw ConfigValidationError(errors);
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigValidationError({path + ": cannot open configuration file"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace dips
