#pragma once

// Aircraft/terrain case-study model.
//
// A six-state point-mass aircraft (x, y, h, V, psi, gamma) follows a U-shaped
// waypoint route between two conical peaks. The altimeter reads h - eps_h,
// so the vertical guidance flies the route shifted by eps_h. When eps_h is
// nonzero the pilot reacts after t_r, and the aircraft climbs at full thrust
// until it clears the peaks. A run ends on terrain contact, on leaving the airspace box, or at
// the maximum flight time. The limit state is the miss distance d: the
// smallest terrain clearance seen along the trajectory.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dips/rng.hpp"
#include "dips/turbulence.hpp"

namespace dips {

struct Cone {
    double x_nm = 0.0;
    double y_nm = 0.0;
    double radius_nm = 3.0;
    double height_ft = 3600.0;
};

struct TerrainModel {
    double base_ft = 0.0;
    std::vector<Cone> cones;

    void validate() const;
    double max_height_ft() const;
};

struct Point3 {
    double x_nm = 0.0;
    double y_nm = 0.0;
    double h_ft = 0.0;
};

// Distance in feet from a point to the terrain surface; 0 inside terrain.
double terrain_distance(const Point3& p, const TerrainModel& terrain);

struct Waypoint {
    double x_nm = 0.0;
    double y_nm = 0.0;
    double h_ft = 0.0;
};

struct RouteSpec {
    std::vector<Waypoint> waypoints;
    double box_x_lo_nm = -2.0, box_x_hi_nm = 18.0;
    double box_y_lo_nm = -4.0, box_y_hi_nm = 6.0;
    double box_h_hi_ft = 20000.0;
    double max_time_s = 900.0;

    void validate() const;
    bool inside(const Point3& p) const;
};

struct AircraftConstants {
    double tau_V_s = 10.0;
    double tau_psi_s = 5.0;
    double tau_gamma_s = 4.0;
    double V_min_kt = 180.0;
    double V_max_kt = 320.0;
    double V_cruise_kt = 250.0;
    double gamma_climb_deg = 6.0;    // full-thrust climb
    double gamma_min_deg = -8.0;
    double turn_rate_deg_s = 3.0;
    double lookahead_nm = 1.0;
    double altitude_time_s = 20.0;   // vertical guidance time constant
    double avoidance_margin_ft = 500.0;
    double dt_s = 0.1;

    void validate() const;
};

struct DisturbanceVector {
    double eps_h_ft = 0.0;   // altimeter offset; indicated = true - eps_h
    double t_r_s = 0.0;      // pilot reaction time
    double w_x_kt = 0.0;
    double w_y_kt = 0.0;
    bool turbulence = false;
};

enum class GuidanceMode { en_route, avoidance };
enum class Termination { none, terrain_hit, box_exit, time_out };

std::string to_string(GuidanceMode m);
std::string to_string(Termination t);

struct AircraftState {
    double x_nm = 0.0;
    double y_nm = 0.0;
    double h_ft = 0.0;
    double V_kt = 0.0;
    double psi = 0.0;    // heading, radians counter-clockwise from +x
    double gamma = 0.0;  // flight-path angle, radians
    GuidanceMode mode = GuidanceMode::en_route;
    bool levelled = false;   // avoidance climb finished
    double t_s = 0.0;
    std::size_t leg = 0;
    std::uint64_t step = 0;

    Point3 position() const { return {x_nm, y_nm, h_ft}; }
};

struct Scenario {
    TerrainModel terrain;
    RouteSpec route;
    AircraftConstants aircraft;
    DrydenParams dryden;

    void validate() const;

    // Default geometry: entry at the upper right, descent to 2000 ft, a
    // westbound leg between peaks at (8, +-2.5) NM, exit at the upper left.
    static Scenario reference();
};

AircraftState initial_state(const Scenario& sc, const DisturbanceVector& dist);

// One explicit Euler step of dt seconds. Throws SimulationFault on a
// non-finite state.
AircraftState step(const Scenario& sc, const AircraftState& s, const DisturbanceVector& dist, const Gust& gust);

struct TrajectorySample {
    double t_s, x_nm, y_nm, h_ft, V_kt, psi, gamma;
    GuidanceMode mode;
    Gust gust;
    double terrain_ft;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    Termination reason = Termination::none;
    double miss_distance = 0.0;
    std::vector<double> thresholds;
    std::vector<std::optional<double>> passage_times;  // per threshold
};

// Full run from the entry point. Samples are kept when `record` is set.
Trajectory simulate(const Scenario& sc, const DisturbanceVector& dist, rng::StreamKey key,
                    std::span<const double> thresholds = {}, bool record = true);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

// Maps a physical point to disturbances. Recognised names: eps_h, t_r,
// w_x, w_y; absent ones stay zero.
DisturbanceVector disturbance_from(std::span<const std::string> names, std::span<const double> x, bool turbulence);

// Incremental simulation, used by the splitting estimators.
class ScenarioModel {
public:
    struct State {
        AircraftState ac;
        GustFilterState gust_state;
        Gust gust;
        double d_min = 0.0;
        Termination reason = Termination::none;
        rng::StreamKey key;
    };

    ScenarioModel(const Scenario& sc, DisturbanceVector dist);

    State spawn(rng::StreamKey key) const;
    // Runs until d_min <= level (true) or the run terminates (false).
    bool advance(State& s, double level) const;
    double distance(const State& s) const { return s.d_min; }
    void rebranch(State& s, rng::StreamKey key) const { s.key = key; }

    const DisturbanceVector& disturbance() const { return dist_; }

private:
    void observe(State& s) const;
    Scenario sc_;
    DisturbanceVector dist_;
};

}  // namespace dips
