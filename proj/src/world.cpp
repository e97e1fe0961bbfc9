#include "rasim/world.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rasim/errors.hpp"

namespace rasim {

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

Side side_from_string(std::string_view text) {
  if (text == "left") return Side::Left;
  if (text == "right") return Side::Right;
  throw ConfigError("works_side must be 'left' or 'right', got '" + std::string(text) + "'");
}

ScenarioConfig with_side(ScenarioConfig config, Side side) {
  if (config.works_side != side) {
    for (int& lane : config.blocked_lanes) lane = config.lane_count - 1 - lane;
    std::sort(config.blocked_lanes.begin(), config.blocked_lanes.end());
    config.works_side = side;
  }
  return config;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
  }
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + std::string(key) + "': not an integer: '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text) {
  ScenarioConfig cfg;
  bool blocked_given = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "lane_count") {
      cfg.lane_count = parse_int(key, value);
    } else if (key == "lane_width_m") {
      cfg.lane_width_m = parse_double(key, value);
    } else if (key == "works_side") {
      cfg.works_side = side_from_string(value);
    } else if (key == "works_start_m") {
      cfg.works_start_m = parse_double(key, value);
    } else if (key == "works_end_m") {
      cfg.works_end_m = parse_double(key, value);
    } else if (key == "blocked_lanes") {
      cfg.blocked_lanes.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        cfg.blocked_lanes.push_back(parse_int(key, trim(rest.substr(0, comma))));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
      blocked_given = true;
    } else if (key == "view_range_m") {
      cfg.view_range_m = parse_double(key, value);
    } else if (key == "resolution_distance_m") {
      cfg.resolution_distance_m = parse_double(key, value);
    } else if (key == "initial_path_m") {
      cfg.initial_path_m = parse_double(key, value);
    } else {
      throw ConfigError("unknown key '" + std::string(key) + "' at line " + std::to_string(line_no));
    }
  }
  if (!blocked_given) {
    // Default closure is the two lanes at the works side.
    cfg.blocked_lanes.clear();
    for (int i = 1; i < cfg.lane_count; ++i) {
      cfg.blocked_lanes.push_back(cfg.works_side == Side::Left ? i : i - 1);
    }
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config(ss.str());
}

std::string format_scenario_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "lane_count = " << c.lane_count << '\n'
      << "lane_width_m = " << c.lane_width_m << '\n'
      << "works_side = " << to_string(c.works_side) << '\n'
      << "works_start_m = " << c.works_start_m << '\n'
      << "works_end_m = " << c.works_end_m << '\n'
      << "blocked_lanes = ";
  for (std::size_t i = 0; i < c.blocked_lanes.size(); ++i) out << (i ? "," : "") << c.blocked_lanes[i];
  out << '\n'
      << "view_range_m = " << c.view_range_m << '\n'
      << "resolution_distance_m = " << c.resolution_distance_m << '\n'
      << "initial_path_m = " << c.initial_path_m << '\n';
  return out.str();
}

double World::lane_center_offset(int lane) const {
  return (lane - (config.lane_count - 1) / 2.0) * config.lane_width_m;
}

double World::road_half_width() const { return config.lane_count * config.lane_width_m / 2.0; }

bool World::lane_blocked(int lane) const {
  return std::find(works.blocked_lanes.begin(), works.blocked_lanes.end(), lane) != works.blocked_lanes.end();
}

std::vector<int> World::passable_lanes_at(double s) const {
  std::vector<int> out;
  for (const LaneSpec& l : lanes) {
    if (!lane_blocked_at(l.lane_id, s)) out.push_back(l.lane_id);
  }
  return out;
}

Vec2 World::lane_point(int lane, double s) const { return {s, lane_center_offset(lane)}; }

std::vector<Vec2> World::works_polygon() const {
  // Closed band [inner, outer] laterally; the taper runs from the outer edge at start_s to the inner line.
  const double w = config.lane_width_m;
  const auto [lo, hi] = std::minmax_element(works.blocked_lanes.begin(), works.blocked_lanes.end());
  double inner = 0.0, outer = 0.0;
  if (works.side == Side::Left) {
    inner = lane_center_offset(*lo) - w / 2.0;
    outer = road_half_width();
  } else {
    inner = lane_center_offset(*hi) + w / 2.0;
    outer = -road_half_width();
  }
  const double taper_end = std::min(works.start_s + works.taper_m, works.end_s);
  std::vector<Vec2> poly{{works.start_s, outer}, {taper_end, inner}, {works.end_s, inner}, {works.end_s, outer}};
  if (works.side == Side::Left) std::reverse(poly.begin(), poly.end());
  return poly;
}

World build_scenario(const ScenarioConfig& config) {
  if (config.lane_count != 3) {
    throw ConfigError("lane_count must be 3, got " + std::to_string(config.lane_count));
  }
  if (!(config.lane_width_m > 0.0)) throw ConfigError("lane_width_m must be positive");
  if (!(config.works_end_m > config.works_start_m)) {
    throw ConfigError("works zone has zero or negative length (works_end_m <= works_start_m)");
  }
  if (config.works_start_m <= config.road_start_m || config.works_end_m >= config.road_end_m) {
    throw ConfigError("works zone must lie inside the road");
  }
  if (!(config.view_range_m > 0.0) || !(config.resolution_distance_m > 0.0) || !(config.initial_path_m > 0.0)) {
    throw ConfigError("view_range_m, resolution_distance_m and initial_path_m must be positive");
  }
  std::vector<int> blocked = config.blocked_lanes;
  std::sort(blocked.begin(), blocked.end());
  blocked.erase(std::unique(blocked.begin(), blocked.end()), blocked.end());
  if (blocked.empty() || static_cast<int>(blocked.size()) >= config.lane_count) {
    throw ConfigError("blocked_lanes must be a non-empty strict subset of the lanes");
  }
  for (std::size_t i = 0; i < blocked.size(); ++i) {
    if (blocked[i] < 0 || blocked[i] >= config.lane_count) {
      throw ConfigError("blocked_lanes contains unknown lane " + std::to_string(blocked[i]));
    }
    if (i > 0 && blocked[i] != blocked[i - 1] + 1) throw ConfigError("blocked_lanes must be contiguous");
  }
  const bool touches_edge = config.works_side == Side::Left ? blocked.back() == config.lane_count - 1
                                                            : blocked.front() == 0;
  if (!touches_edge) {
    throw ConfigError("blocked_lanes must include the lane at the " + std::string(to_string(config.works_side)) +
                      " road edge");
  }

  World world;
  world.config = config;
  world.config.blocked_lanes = blocked;
  world.view_range_m = config.view_range_m;
  world.resolution_distance_m = config.resolution_distance_m;
  world.initial_path_m = config.initial_path_m;
  world.axis = Polyline({{config.road_start_m, 0.0}, {config.road_end_m, 0.0}});
  for (int lane = 0; lane < config.lane_count; ++lane) {
    const double y = world.lane_center_offset(lane);
    world.lanes.push_back(
        {lane, Polyline({{config.road_start_m, y}, {config.road_end_m, y}}), config.lane_width_m});
  }
  world.works = {config.works_start_m, config.works_end_m, blocked, config.works_side, config.taper_m};

  // Cone line, inset by one cone radius from the closed area's edges so every cone disc lies inside it.
  const double r = config.cone_radius_m;
  const double sign = config.works_side == Side::Left ? 1.0 : -1.0;
  const double inner_edge = config.works_side == Side::Left
                                ? world.lane_center_offset(blocked.front()) - config.lane_width_m / 2.0
                                : world.lane_center_offset(blocked.back()) + config.lane_width_m / 2.0;
  const double inner = inner_edge + sign * r;
  const double outer = sign * (world.road_half_width() - r);
  const Vec2 edge_a{config.works_start_m, sign * world.road_half_width()};
  const Vec2 edge_b{std::min(config.works_start_m + config.taper_m, config.works_end_m), inner_edge};
  const Vec2 dir = (edge_b - edge_a) * (1.0 / distance(edge_a, edge_b));
  const Vec2 normal = Vec2{-dir.y, dir.x} * (dir.x * sign > 0.0 ? 1.0 : -1.0);  // towards the closed side
  const Vec2 base = edge_a + normal * r;
  // The inset taper runs between the inset outer edge and the inset inner line.
  const Vec2 taper_a = base + dir * ((outer - base.y) / dir.y);
  const Vec2 taper_b = base + dir * ((inner - base.y) / dir.y);
  const double taper_len = distance(taper_a, taper_b);
  const auto taper_n = static_cast<int>(std::floor(taper_len / config.cone_spacing_m));
  for (int k = 0; k <= taper_n; ++k) {
    world.obstacles.push_back({taper_a + dir * (k * config.cone_spacing_m), r});
  }
  for (double x = taper_b.x; x <= config.works_end_m - r + 1e-9; x += config.cone_spacing_m) {
    world.obstacles.push_back({{x, inner}, r});
  }
  return world;
}

LaneMatch nearest_lane_center(const World& world, Vec2 p) {
  const double w = world.lane_width();
  if (p.x < world.config.road_start_m - w || p.x > world.config.road_end_m + w ||
      std::abs(p.y) > world.road_half_width() + w) {
    throw OutOfRoad("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") is off the road");
  }
  LaneMatch best{-1, {}, std::numeric_limits<double>::infinity()};
  for (const LaneSpec& lane : world.lanes) {
    const auto proj = lane.centerline.project(p);
    if (proj.distance < best.deviation) best = {lane.lane_id, proj.foot, proj.distance};
  }
  return best;
}

double road_coordinate(const World& world, Vec2 p) {
  return world.axis.project(p).s + world.config.road_start_m;
}

double progress_along(const World& world, double origin_s, Vec2 pose) {
  return road_coordinate(world, pose) - origin_s;
}

}  // namespace rasim
