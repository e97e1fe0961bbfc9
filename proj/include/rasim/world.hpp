#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rasim/geometry.hpp"

namespace rasim {

/// Which road edge the works occupy, as seen in the driving direction (+x).
enum class Side { Left, Right };

std::string_view to_string(Side side);
Side side_from_string(std::string_view text);  // "left" | "right", throws ConfigError

/// Scenario parameters. Lane 0 is the rightmost lane; the road axis is y = 0 and traffic drives towards +x.
struct ScenarioConfig {
  int lane_count = 3;
  double lane_width_m = 3.5;
  Side works_side = Side::Left;
  double works_start_m = 200.0;
  double works_end_m = 450.0;
  /// Closed lanes, numbered for `works_side`. Must be contiguous and touch that side's road edge.
  std::vector<int> blocked_lanes{1, 2};
  double view_range_m = 200.0;
  double resolution_distance_m = 600.0;
  double initial_path_m = 200.0;

  // Not exposed in the config file.
  double taper_m = 50.0;
  double cone_radius_m = 0.3;
  double cone_spacing_m = 4.0;
  double road_start_m = -300.0;
  double road_end_m = 1200.0;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Same layout on the other road side: blocked lanes are reflected about the road axis.
ScenarioConfig with_side(ScenarioConfig config, Side side);

/// Parses the flat `key = value` scenario file format. `#` starts a comment.
/// Unknown keys and unparsable values raise ConfigError naming the key.
ScenarioConfig parse_scenario_config(std::string_view text);
ScenarioConfig load_scenario_config(const std::string& path);
std::string format_scenario_config(const ScenarioConfig& config);

struct LaneSpec {
  int lane_id = 0;
  Polyline centerline;
  double width = 0.0;
};

struct WorksZone {
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<int> blocked_lanes;
  Side side = Side::Left;
  double taper_m = 0.0;
};

/// Immutable road and works geometry for one assisted vehicle's scene.
struct World {
  ScenarioConfig config;
  std::vector<LaneSpec> lanes;
  WorksZone works;
  std::vector<Disc> obstacles;  // cones
  Polyline axis;                // road axis, parameterized so that arc length + road_start = x
  double view_range_m = 0.0;
  double resolution_distance_m = 0.0;
  double initial_path_m = 0.0;

  double lane_width() const { return config.lane_width_m; }
  double lane_center_offset(int lane) const;
  double road_half_width() const;
  bool in_works(double s) const { return s >= works.start_s && s <= works.end_s; }
  bool lane_blocked(int lane) const;
  bool lane_blocked_at(int lane, double s) const { return in_works(s) && lane_blocked(lane); }
  /// Lanes open at road coordinate s, ascending.
  std::vector<int> passable_lanes_at(double s) const;
  /// Point on a lane centerline at road coordinate s.
  Vec2 lane_point(int lane, double s) const;
  /// Outline of the closed area (taper plus closed band), counter-clockwise.
  std::vector<Vec2> works_polygon() const;
};

/// Three parallel lanes with a works zone and its cone line. Throws ConfigError for invalid configs.
World build_scenario(const ScenarioConfig& config);

struct LaneMatch {
  int lane_id = 0;
  Vec2 foot;
  double deviation = 0.0;
};

/// Nearest lane centerline to p. Throws OutOfRoad outside the road box grown by one lane width.
LaneMatch nearest_lane_center(const World& world, Vec2 p);

/// Road coordinate (arc length along the axis, offset so it equals x on the straight road).
double road_coordinate(const World& world, Vec2 p);

/// Signed advance along the road axis since `origin_s`.
double progress_along(const World& world, double origin_s, Vec2 pose);

/// Running progress: keeps the raw signed value and its running maximum.
struct Progress {
  double raw = 0.0;
  double max = 0.0;
  void update(double raw_now) {
    raw = raw_now;
    if (raw_now > max) max = raw_now;
  }
};

/// Reflection about the road axis.
constexpr Vec2 mirror(Vec2 p) { return {p.x, -p.y}; }

}  // namespace rasim
