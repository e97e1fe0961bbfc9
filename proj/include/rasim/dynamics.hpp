#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rasim/geometry.hpp"
#include "rasim/pathedit.hpp"
#include "rasim/world.hpp"

namespace rasim {

enum class VehicleKind { Assisted, Traffic };

struct Proximity {
  bool front = false;
  bool rear = false;
  bool operator==(const Proximity&) const = default;
};

struct KinematicsConfig {
  double approach_speed = 33.333333333333336;  // 120 km/h
  double works_speed = 8.333333333333334;      // 30 km/h
  double max_accel = 2.5;
  double max_decel = 4.0;
  double planning_decel = 3.0;  // used for stopping profiles, leaves margin below max_decel
  double proximity_radius = 5.0;
  double stop_standoff = 2.0;
  double lookahead_min = 6.0;
  double lookahead_gain = 0.5;  // seconds of travel
  double reverse_speed = 2.0;
  double min_turn_radius = 6.0;
  double lateral_accel = 3.0;
  double min_curve_speed = 3.0;
  double half_length = 2.25;
  double half_width = 1.0;
  double obstacle_inflation = 0.2;  // added around other vehicles when scanning the path
  double scan_step = 0.5;

  bool operator==(const KinematicsConfig&) const = default;
};

/// Validates a kinematics config. Throws ConfigError.
void validate(const KinematicsConfig& cfg);

struct VehicleState {
  int id = 0;
  VehicleKind kind = VehicleKind::Assisted;
  Pose pose;
  double speed = 0.0;
  std::optional<PlannedPath> path;
  double origin_s = 0.0;
  Progress progress;
  bool stopped_by_collision = false;
  bool at_path_end = false;
  Proximity proximity;

  // Path follower state.
  double track_s = 0.0;
  bool reversing = false;

  // Traffic lane keeping.
  int lane = 0;
  int target_lane = 0;
  double lane_change_elapsed = 0.0;
  double desired_factor = 1.0;

  double half_length = 2.25;
  double half_width = 1.0;

  OrientedRect footprint() const { return {pose.position, pose.heading, half_length, half_width}; }
  bool changing_lane() const { return lane != target_lane; }
};

/// An assisted vehicle at `pose` following `path`, at `speed`.
VehicleState make_assisted(const World& world, int id, const Pose& pose, double speed, PlannedPath path,
                           const KinematicsConfig& cfg = {});

/// Installs a new path and restarts tracking from its committed waypoint.
void set_path(VehicleState& v, PlannedPath path);

/// Zone speed at road coordinate s without anticipation.
double zone_speed(const World& world, double s, const KinematicsConfig& cfg);

/// Free distance the vehicle centre can travel along its path before the footprint touches a cone or another
/// vehicle (inflated), searched up to `horizon` metres. nullopt when clear.
std::optional<double> path_contact(const VehicleState& v, const std::vector<Disc>& cones,
                                   const std::vector<VehicleState>& others, const KinematicsConfig& cfg,
                                   double horizon);

/// One fixed tick of an assisted vehicle: pure pursuit on its path, speed planning toward the zone target,
/// stopping at the path end and in front of obstacles.
VehicleState step_vehicle(const World& world, const VehicleState& v, const std::vector<VehicleState>& others,
                          const KinematicsConfig& cfg, double dt);

/// Front/rear occupancy within `radius` of the footprint, split by the half-plane through the vehicle centre.
Proximity proximity_flags(const VehicleState& v, const std::vector<VehicleState>& others,
                          const std::vector<Disc>& obstacles, double radius);

/// A vehicle is resolved once it progressed the resolution distance.
bool is_resolved(const World& world, const VehicleState& v);

struct TrafficConfig {
  bool enabled = true;
  double mean_interarrival_s = 5.5;
  double spawn_x = -250.0;
  double spawn_clearance_m = 30.0;
  double despawn_margin_m = 20.0;
  double headway_s = 1.5;
  double standstill_gap_m = 2.0;
  double min_gap_m = 0.5;  // hard floor between bumpers
  double emergency_decel = 8.0;
  double lane_change_s = 2.5;
  double mandatory_lookahead_m = 220.0;
  double courtesy_gap_m = 40.0;
  double slow_leader_ratio = 0.7;
  double slow_leader_range_m = 60.0;
  double desired_spread = 0.15;  // desired speed drawn from [1 - spread, 1] times the zone speed

  bool operator==(const TrafficConfig&) const = default;
};

/// Portable random source: mt19937_64 with hand-rolled conversions so streams match across standard libraries.
class TrafficRng {
public:
  explicit TrafficRng(std::uint64_t seed) : gen_(seed) {}
  double uniform();  // [0, 1)
  double exponential(double mean);
  int pick(int n);

private:
  std::mt19937_64 gen_;
};

struct TrafficState {
  std::vector<VehicleState> vehicles;
  TrafficRng rng{1};
  double next_spawn = 0.0;
  int next_id = 1000;
};

TrafficState make_traffic(std::uint64_t seed, const TrafficConfig& cfg);

/// One tick of background traffic: spawning, car following with a hard bumper floor, lane changes outside the
/// works only, despawning at the road end. `clock` is the time at the start of the tick.
void step_traffic(const World& world, TrafficState& traffic, const std::vector<VehicleState>& assisted,
                  const KinematicsConfig& kin, const TrafficConfig& cfg, double clock, double dt);

}  // namespace rasim
