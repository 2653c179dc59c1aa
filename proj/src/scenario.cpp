#include "dips/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "dips/errors.hpp"

namespace dips {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_pi(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a;
}

// Distance in the (r, z) half-plane from (r, z) to the solid triangle with
// vertices (0, 0), (R, 0), (0, H).
double cone_distance(double r, double z, double R, double H) {
    if (z <= 0.0) return 0.0;
    if (r <= R && z <= H * (1.0 - r / R)) return 0.0;
    // Nearest point on the slant segment from the apex (0, H) to the rim (R, 0).
    const double ex = R, ez = -H;
    const double t = std::clamp((r * ex + (z - H) * ez) / (ex * ex + ez * ez), 0.0, 1.0);
    return std::hypot(r - t * ex, z - (H + t * ez));
}

struct LegGeometry {
    double ex, ey, len_nm, along_nm, cross_nm;  // cross > 0 left of track
};

LegGeometry leg_geometry(const RouteSpec& route, std::size_t leg, double x, double y) {
    const auto& a = route.waypoints[leg];
    const auto& b = route.waypoints[leg + 1];
    LegGeometry g{};
    const double dx = b.x_nm - a.x_nm, dy = b.y_nm - a.y_nm;
    g.len_nm = std::hypot(dx, dy);
    g.ex = dx / g.len_nm;
    g.ey = dy / g.len_nm;
    g.along_nm = (x - a.x_nm) * g.ex + (y - a.y_nm) * g.ey;
    g.cross_nm = g.ex * (y - a.y_nm) - g.ey * (x - a.x_nm);
    return g;
}

double turn_radius_nm(const AircraftConstants& ac, double V_kt) {
    const double omega = ac.turn_rate_deg_s * kDeg;
    return V_kt / 3600.0 / omega;
}

bool finite_state(const AircraftState& s) {
    return std::isfinite(s.x_nm) && std::isfinite(s.y_nm) && std::isfinite(s.h_ft) && std::isfinite(s.V_kt) &&
           std::isfinite(s.psi) && std::isfinite(s.gamma);
}

}  // namespace

void TerrainModel::validate() const {
    for (const auto& c : cones)
        if (!(c.radius_nm > 0.0 && c.height_ft > 0.0)) throw UsageError("terrain: cone radius and height must be > 0");
}

double TerrainModel::max_height_ft() const {
    double h = base_ft;
    for (const auto& c : cones) h = std::max(h, base_ft + c.height_ft);
    return h;
}

double terrain_distance(const Point3& p, const TerrainModel& terrain) {
    const double z = p.h_ft - terrain.base_ft;
    if (z <= 0.0) return 0.0;
    double d = z;
    for (const auto& c : terrain.cones) {
        const double r = std::hypot(p.x_nm - c.x_nm, p.y_nm - c.y_nm) * kFeetPerNm;
        d = std::min(d, cone_distance(r, z, c.radius_nm * kFeetPerNm, c.height_ft));
        if (d == 0.0) break;
    }
    return d;
}

void RouteSpec::validate() const {
    if (waypoints.size() < 2) throw UsageError("route: at least two waypoints are required");
    if (!(box_x_lo_nm < box_x_hi_nm && box_y_lo_nm < box_y_hi_nm)) throw UsageError("route: empty bounding box");
    if (!(max_time_s > 0.0)) throw UsageError("route: max_time_s must be > 0");
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        const auto& w = waypoints[i];
        if (!inside({w.x_nm, w.y_nm, w.h_ft})) throw UsageError("route: waypoint " + std::to_string(i) + " outside the box");
        if (i > 0 && std::hypot(w.x_nm - waypoints[i - 1].x_nm, w.y_nm - waypoints[i - 1].y_nm) == 0.0)
            throw UsageError("route: repeated waypoint " + std::to_string(i));
    }
}

bool RouteSpec::inside(const Point3& p) const {
    return p.x_nm >= box_x_lo_nm && p.x_nm <= box_x_hi_nm && p.y_nm >= box_y_lo_nm && p.y_nm <= box_y_hi_nm &&
           p.h_ft <= box_h_hi_ft;
}

void AircraftConstants::validate() const {
    if (!(tau_V_s > 0 && tau_psi_s > 0 && tau_gamma_s > 0)) throw UsageError("aircraft: time constants must be > 0");
    if (!(V_min_kt > 0 && V_min_kt <= V_cruise_kt && V_cruise_kt <= V_max_kt))
        throw UsageError("aircraft: need 0 < V_min <= V_cruise <= V_max");
    if (!(gamma_min_deg < 0 && gamma_climb_deg > 0)) throw UsageError("aircraft: need gamma_min < 0 < gamma_climb");
    if (!(turn_rate_deg_s > 0 && lookahead_nm > 0 && altitude_time_s > 0))
        throw UsageError("aircraft: guidance gains must be > 0");
    if (dt_s != 0.1) throw UsageError("aircraft: dt_s is fixed at 0.1");
}

void Scenario::validate() const {
    terrain.validate();
    route.validate();
    aircraft.validate();
    dryden.validate();
}

Scenario Scenario::reference() {
    Scenario sc;
    sc.terrain.cones = {{8.0, 2.5, 3.0, 3600.0}, {8.0, -2.5, 3.0, 3600.0}};
    sc.route.waypoints = {{16.0, 6.0, 3000.0}, {16.0, 0.0, 2000.0}, {0.0, 0.0, 2000.0}, {0.0, 6.0, 2000.0}};
    return sc;
}

std::string to_string(GuidanceMode m) { return m == GuidanceMode::en_route ? "en_route" : "avoidance"; }

std::string to_string(Termination t) {
    switch (t) {
        case Termination::none: return "none";
        case Termination::terrain_hit: return "terrain_hit";
        case Termination::box_exit: return "box_exit";
        case Termination::time_out: return "time_out";
    }
    return "?";
}

AircraftState initial_state(const Scenario& sc, const DisturbanceVector& dist) {
    const auto& w0 = sc.route.waypoints.front();
    const auto& w1 = sc.route.waypoints[1];
    AircraftState s;
    s.x_nm = w0.x_nm;
    s.y_nm = w0.y_nm;
    s.h_ft = w0.h_ft + dist.eps_h_ft;
    s.V_kt = sc.aircraft.V_cruise_kt;
    s.psi = std::atan2(w1.y_nm - w0.y_nm, w1.x_nm - w0.x_nm);
    s.gamma = 0.0;
    if (dist.eps_h_ft != 0.0 && dist.t_r_s <= 0.0) s.mode = GuidanceMode::avoidance;
    return s;
}

AircraftState step(const Scenario& sc, const AircraftState& s, const DisturbanceVector& dist, const Gust& gust) {
    const auto& ac = sc.aircraft;
    const auto& route = sc.route;
    const double dt = ac.dt_s;
    const double V_fps = s.V_kt * kFpsPerKnot;
    const double wx = dist.w_x_kt * kFpsPerKnot;
    const double wy = dist.w_y_kt * kFpsPerKnot;
    AircraftState n = s;

    // Lateral guidance with leg sequencing.
    const std::size_t last_leg = route.waypoints.size() - 2;
    auto g = leg_geometry(route, n.leg, s.x_nm, s.y_nm);
    if (n.leg < last_leg) {
        const auto next = leg_geometry(route, n.leg + 1, s.x_nm, s.y_nm);
        const double turn = std::abs(wrap_pi(std::atan2(next.ey, next.ex) - std::atan2(g.ey, g.ex)));
        const double anticipation = turn_radius_nm(ac, s.V_kt) * std::tan(0.5 * turn);
        if (g.along_nm >= g.len_nm - anticipation) {
            ++n.leg;
            g = next;
        }
    }
    const double track = std::atan2(g.ey, g.ex) - std::atan(g.cross_nm / ac.lookahead_nm);
    const double cross_wind = -wx * std::sin(track) + wy * std::cos(track);
    const double horiz = std::max(V_fps * std::cos(s.gamma), 1e-9);
    const double psi_cmd = track - std::asin(std::clamp(cross_wind / horiz, -0.9, 0.9));
    const double max_rate = ac.turn_rate_deg_s * kDeg;
    const double psi_dot = std::clamp(wrap_pi(psi_cmd - s.psi) / ac.tau_psi_s, -max_rate, max_rate);

    // Vertical guidance.
    const double gmin = ac.gamma_min_deg * kDeg;
    const double gmax = ac.gamma_climb_deg * kDeg;
    const double clear_alt = sc.terrain.max_height_ft() + ac.avoidance_margin_ft;
    // The pilot only reacts to an altimeter fault.
    if (n.mode == GuidanceMode::en_route && dist.eps_h_ft != 0.0 && s.t_s >= dist.t_r_s)
        n.mode = GuidanceMode::avoidance;
    if (n.mode == GuidanceMode::avoidance && !n.levelled && s.h_ft > clear_alt) n.levelled = true;
    double gamma_cmd;
    if (n.mode == GuidanceMode::avoidance && !n.levelled) {
        gamma_cmd = gmax;
    } else {
        double h_err;
        if (n.mode == GuidanceMode::avoidance) {
            h_err = clear_alt - s.h_ft;
        } else {
            const auto& a = route.waypoints[n.leg];
            const auto& b = route.waypoints[n.leg + 1];
            const double frac = std::clamp(g.along_nm / g.len_nm, 0.0, 1.0);
            const double h_cmd = a.h_ft + frac * (b.h_ft - a.h_ft);
            const double h_ind = s.h_ft - dist.eps_h_ft;
            h_err = h_cmd - h_ind;
        }
        gamma_cmd = std::clamp(std::atan(h_err / (ac.altitude_time_s * V_fps)), gmin, gmax);
    }
    const double gamma_dot = (gamma_cmd - s.gamma) / ac.tau_gamma_s;

    const double V_dot = (ac.V_cruise_kt - s.V_kt) / ac.tau_V_s;

    // Kinematics: air-relative velocity plus wind plus body-axis gusts.
    const double cp = std::cos(s.psi), sp = std::sin(s.psi);
    const double vx = V_fps * std::cos(s.gamma) * cp + wx + gust.u * cp + gust.v * sp;
    const double vy = V_fps * std::cos(s.gamma) * sp + wy + gust.u * sp - gust.v * cp;
    const double vz = V_fps * std::sin(s.gamma) - gust.w;

    n.x_nm = s.x_nm + vx * dt / kFeetPerNm;
    n.y_nm = s.y_nm + vy * dt / kFeetPerNm;
    n.h_ft = s.h_ft + vz * dt;
    n.V_kt = std::clamp(s.V_kt + V_dot * dt, ac.V_min_kt, ac.V_max_kt);
    n.psi = wrap_pi(s.psi + psi_dot * dt);
    n.gamma = std::clamp(s.gamma + gamma_dot * dt, gmin, gmax);
    n.t_s = s.t_s + dt;
    ++n.step;
    if (!finite_state(n)) throw SimulationFault("non-finite aircraft state", n.t_s);
    return n;
}

// ---------------------------------------------------------------------------

ScenarioModel::ScenarioModel(const Scenario& sc, DisturbanceVector dist) : sc_(sc), dist_(dist) {
    if (dist_.t_r_s < 0.0) throw UsageError("scenario: t_r must be >= 0");
}

void ScenarioModel::observe(State& s) const {
    const double d = terrain_distance(s.ac.position(), sc_.terrain);
    s.d_min = std::min(s.d_min, d);
    if (d == 0.0) {
        s.reason = Termination::terrain_hit;
    } else if (!sc_.route.inside(s.ac.position())) {
        s.reason = Termination::box_exit;
    } else if (s.ac.t_s >= sc_.route.max_time_s) {
        s.reason = Termination::time_out;
    }
}

ScenarioModel::State ScenarioModel::spawn(rng::StreamKey key) const {
    State s;
    s.ac = initial_state(sc_, dist_);
    s.key = key;
    s.d_min = std::numeric_limits<double>::infinity();
    observe(s);
    return s;
}

bool ScenarioModel::advance(State& s, double level) const {
    if (s.d_min <= level) return true;
    std::optional<DrydenFilter> filter;
    if (dist_.turbulence) filter.emplace(sc_.dryden, sc_.aircraft.dt_s);
    while (s.reason == Termination::none) {
        if (filter) s.gust = filter->step(s.gust_state, s.ac.V_kt * kFpsPerKnot, gust_gaussians(s.key, s.ac.step));
        s.ac = step(sc_, s.ac, dist_, s.gust);
        observe(s);
        if (s.d_min <= level) return true;
    }
    return false;
}

Trajectory simulate(const Scenario& sc, const DisturbanceVector& dist, rng::StreamKey key,
                    std::span<const double> thresholds, bool record) {
    sc.validate();
    ScenarioModel model(sc, dist);
    Trajectory tr;
    tr.thresholds.assign(thresholds.begin(), thresholds.end());
    tr.passage_times.assign(thresholds.size(), std::nullopt);
    auto s = model.spawn(key);
    auto log = [&](const ScenarioModel::State& st) {
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            if (!tr.passage_times[i] && st.d_min <= thresholds[i]) tr.passage_times[i] = st.ac.t_s;
        if (!record) return;
        const auto& a = st.ac;
        tr.samples.push_back({a.t_s, a.x_nm, a.y_nm, a.h_ft, a.V_kt, a.psi, a.gamma, a.mode, st.gust,
                              terrain_distance(a.position(), sc.terrain)});
    };
    log(s);
    std::optional<DrydenFilter> filter;
    if (dist.turbulence) filter.emplace(sc.dryden, sc.aircraft.dt_s);
    while (s.reason == Termination::none) {
        if (filter) s.gust = filter->step(s.gust_state, s.ac.V_kt * kFpsPerKnot, gust_gaussians(s.key, s.ac.step));
        s.ac = step(sc, s.ac, dist, s.gust);
        const double d = terrain_distance(s.ac.position(), sc.terrain);
        s.d_min = std::min(s.d_min, d);
        if (d == 0.0) s.reason = Termination::terrain_hit;
        else if (!sc.route.inside(s.ac.position())) s.reason = Termination::box_exit;
        else if (s.ac.t_s >= sc.route.max_time_s) s.reason = Termination::time_out;
        log(s);
    }
    tr.reason = s.reason;
    tr.miss_distance = s.d_min;
    return tr;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    os.precision(10);
    os << "schema,time_s,x_nm,y_nm,h_ft,V_kt,psi_rad,gamma_rad,mode,gust_u_fps,gust_v_fps,gust_w_fps,terrain_ft\n";
    for (const auto& s : tr.samples) {
        os << "trajectory.v1," << s.t_s << ',' << s.x_nm << ',' << s.y_nm << ',' << s.h_ft << ',' << s.V_kt << ',' << s.psi << ','
           << s.gamma << ',' << to_string(s.mode) << ',' << s.gust.u << ',' << s.gust.v << ',' << s.gust.w << ','
           << s.terrain_ft << '\n';
    }
}

DisturbanceVector disturbance_from(std::span<const std::string> names, std::span<const double> x, bool turbulence) {
    if (names.size() != x.size()) throw UsageError("disturbance: dimension mismatch");
    DisturbanceVector d;
    d.turbulence = turbulence;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "eps_h") d.eps_h_ft = x[i];
        else if (names[i] == "t_r") d.t_r_s = x[i];
        else if (names[i] == "w_x") d.w_x_kt = x[i];
        else if (names[i] == "w_y") d.w_y_kt = x[i];
        else throw UsageError("scenario has no parameter named '" + names[i] + "'");
    }
    return d;
}

}  // namespace dips
