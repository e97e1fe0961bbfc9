#include "rasim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rasim/errors.hpp"

namespace rasim {

void validate(const KinematicsConfig& cfg) {
  const double positives[] = {cfg.approach_speed, cfg.works_speed,    cfg.max_accel,       cfg.max_decel,
                              cfg.planning_decel, cfg.proximity_radius, cfg.stop_standoff, cfg.lookahead_min,
                              cfg.reverse_speed,  cfg.min_turn_radius,  cfg.lateral_accel, cfg.half_length,
                              cfg.half_width,     cfg.scan_step};
  for (double v : positives) {
    if (!(v > 0.0)) throw ConfigError("kinematics parameters must be positive");
  }
  if (!(cfg.works_speed < cfg.approach_speed)) throw ConfigError("works_speed must be below approach_speed");
}

VehicleState make_assisted(const World& world, int id, const Pose& pose, double speed, PlannedPath path,
                           const KinematicsConfig& cfg) {
  VehicleState v;
  v.id = id;
  v.kind = VehicleKind::Assisted;
  v.pose = pose;
  v.speed = speed;
  v.origin_s = road_coordinate(world, pose.position);
  v.half_length = cfg.half_length;
  v.half_width = cfg.half_width;
  set_path(v, std::move(path));
  return v;
}

void set_path(VehicleState& v, PlannedPath path) {
  if (path.waypoints.size() < 2) {
    v.path = std::move(path);
    v.track_s = 0.0;
    v.at_path_end = true;
    return;
  }
  const Polyline line(path.waypoints);
  const double s_c = path.committed_s();
  v.track_s = line.project(v.pose.position, s_c, line.length()).s;
  v.at_path_end = false;
  v.path = std::move(path);
}

double zone_speed(const World& world, double s, const KinematicsConfig& cfg) {
  return world.in_works(s) ? cfg.works_speed : cfg.approach_speed;
}

namespace {

OrientedRect inflated(const VehicleState& o, double by) {
  return {o.pose.position, o.pose.heading, o.half_length + by, o.half_width + by};
}

double heading_of(Vec2 t) { return std::atan2(t.y, t.x); }

}  // namespace

std::optional<double> path_contact(const VehicleState& v, const std::vector<Disc>& cones,
                                   const std::vector<VehicleState>& others, const KinematicsConfig& cfg,
                                   double horizon) {
  if (!v.path || v.path->waypoints.size() < 2) return std::nullopt;
  const Polyline line(v.path->waypoints);
  const double end = std::min(line.length(), v.track_s + horizon);
  const double reach = std::hypot(cfg.half_length, cfg.half_width);
  const double search = horizon + 2.0 * reach + 1.0;

  std::vector<Disc> near_cones;
  for (const Disc& d : cones) {
    if (distance(d.center, v.pose.position) <= search + d.radius) near_cones.push_back(d);
  }
  std::vector<OrientedRect> near_cars;
  for (const VehicleState& o : others) {
    if (o.id == v.id) continue;
    if (distance(o.pose.position, v.pose.position) <= search + reach + 1.0) {
      near_cars.push_back(inflated(o, cfg.obstacle_inflation));
    }
  }
  if (near_cones.empty() && near_cars.empty()) return std::nullopt;

  for (double s = v.track_s;; s += cfg.scan_step) {
    const double at = std::min(s, end);
    const Vec2 c = line.at(at);
    const OrientedRect rect{c, heading_of(line.tangent_at(at)), cfg.half_length, cfg.half_width};
    for (const Disc& d : near_cones) {
      if (distance(c, d.center) <= reach + d.radius && intersects(rect, d)) return at - v.track_s;
    }
    for (const OrientedRect& r : near_cars) {
      if (distance(c, r.center) <= reach + std::hypot(r.half_length, r.half_width) && intersects(rect, r)) {
        return at - v.track_s;
      }
    }
    if (at >= end) break;
  }
  return std::nullopt;
}

VehicleState step_vehicle(const World& world, const VehicleState& v, const std::vector<VehicleState>& others,
                          const KinematicsConfig& cfg, double dt) {
  VehicleState n = v;
  const bool has_path = v.path && v.path->waypoints.size() >= 2;

  if (!has_path) {
    n.speed = std::max(0.0, v.speed - cfg.max_decel * dt);
    const double dir = v.reversing ? -1.0 : 1.0;
    n.pose.position = v.pose.position + unit_from_heading(v.pose.heading) * (dir * n.speed * dt);
    n.at_path_end = true;
  } else {
    const Polyline line(v.path->waypoints);
    const double len = line.length();
    const double remaining = std::max(0.0, len - v.track_s);
    const Vec2 tangent = line.tangent_at(std::min(v.track_s + 1e-6, len));
    const bool reverse = dot(tangent, unit_from_heading(v.pose.heading)) < 0.0;
    n.reversing = reverse;
    const double motion_heading = v.pose.heading + (reverse ? kPi : 0.0);

    // Pure pursuit toward a point one lookahead ahead along the path.
    const double ld = std::max(cfg.lookahead_min, cfg.lookahead_gain * v.speed);
    const Vec2 target = line.at(std::min(len, v.track_s + ld));
    const Vec2 to_target = target - v.pose.position;
    const double target_dist = norm(to_target);
    double kappa = 0.0;
    if (target_dist > 0.5) {
      const double alpha = wrap_angle(heading_of(to_target) - motion_heading);
      kappa = 2.0 * std::sin(alpha) / std::max(target_dist, ld);
    }
    const double kappa_max = 1.0 / cfg.min_turn_radius;
    kappa = std::clamp(kappa, -kappa_max, kappa_max);

    // Speed target: zone with works-entry anticipation, path end, curvature, obstacles.
    const double a = cfg.planning_decel;
    const double s_road = road_coordinate(world, v.pose.position);
    double target_speed = reverse ? cfg.reverse_speed : zone_speed(world, s_road, cfg);
    if (!reverse && s_road < world.works.start_s) {
      const double d = std::max(0.0, world.works.start_s - s_road - v.speed * dt);
      target_speed = std::min(target_speed, std::sqrt(cfg.works_speed * cfg.works_speed + 2.0 * a * d));
    }
    target_speed = std::min(target_speed, std::sqrt(2.0 * a * remaining));
    if (std::abs(kappa) > 1e-9) {
      target_speed = std::min(target_speed, std::max(cfg.min_curve_speed, std::sqrt(cfg.lateral_accel / std::abs(kappa))));
    }

    const double horizon = v.speed * v.speed / (2.0 * a) + cfg.stop_standoff + 5.0;
    const auto contact = path_contact(v, world.obstacles, others, cfg, horizon);
    const double free = contact ? *contact - cfg.stop_standoff : std::numeric_limits<double>::infinity();
    const double resume_margin = v.stopped_by_collision ? 0.3 : 0.1;
    if (free < resume_margin) {
      n.stopped_by_collision = true;
      n.speed = 0.0;
    } else {
      n.stopped_by_collision = false;
      if (contact) target_speed = std::min(target_speed, std::sqrt(2.0 * a * free));
      n.speed = std::min(v.speed + cfg.max_accel * dt, target_speed);
      n.speed = std::max(0.0, n.speed);
    }

    const double ds = n.speed * dt;
    if (remaining <= 1e-9 || (ds > 0.0 && ds >= remaining)) {
      n.pose.position = line.back();
      n.speed = 0.0;
      n.track_s = len;
      n.at_path_end = true;
    } else {
      const double dtheta = kappa * ds;
      const double mid = motion_heading + dtheta / 2.0;
      n.pose.position = v.pose.position + unit_from_heading(mid) * ds;
      n.pose.heading = wrap_angle(v.pose.heading + dtheta);
      const double window = std::max(5.0, 2.0 * ds + 2.0);
      const double lo = std::max(v.path->committed_s(), v.track_s - 1.0);
      n.track_s = std::max(v.track_s, line.project(n.pose.position, lo, std::min(len, v.track_s + window)).s);
      n.at_path_end = false;
    }

    // Advance the committed waypoint past everything the vehicle has reached.
    const auto& cum = line.cumulative_s();
    std::size_t committed = n.path->committed_index;
    while (committed + 1 < cum.size() && cum[committed + 1] <= n.track_s + 1e-9) ++committed;
    n.path->committed_index = committed;
  }

  n.progress.update(progress_along(world, v.origin_s, n.pose.position));
  n.proximity = proximity_flags(n, others, world.obstacles, cfg.proximity_radius);
  return n;
}

Proximity proximity_flags(const VehicleState& v, const std::vector<VehicleState>& others,
                          const std::vector<Disc>& obstacles, double radius) {
  Proximity p;
  const OrientedRect me = v.footprint();
  const Vec2 fwd = unit_from_heading(v.pose.heading);
  auto mark = [&](Vec2 center) {
    if (dot(center - v.pose.position, fwd) >= 0.0) {
      p.front = true;
    } else {
      p.rear = true;
    }
  };
  const double reach = std::hypot(v.half_length, v.half_width);
  for (const Disc& d : obstacles) {
    if (distance(d.center, v.pose.position) > reach + radius + d.radius) continue;
    if (me.distance_to(d.center) - d.radius <= radius) mark(d.center);
  }
  for (const VehicleState& o : others) {
    if (o.id == v.id) continue;
    if (distance(o.pose.position, v.pose.position) > 2.0 * reach + radius + 5.0) continue;
    if (distance(me, o.footprint()) <= radius) mark(o.pose.position);
  }
  return p;
}

bool is_resolved(const World& world, const VehicleState& v) {
  return v.progress.max >= world.resolution_distance_m;
}

double TrafficRng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double TrafficRng::exponential(double mean) { return -mean * std::log1p(-uniform()); }

int TrafficRng::pick(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

TrafficState make_traffic(std::uint64_t seed, const TrafficConfig& cfg) {
  TrafficState t;
  t.rng = TrafficRng(seed);
  t.next_spawn = cfg.enabled ? t.rng.exponential(cfg.mean_interarrival_s) : std::numeric_limits<double>::infinity();
  return t;
}

namespace {

/// Longitudinal extent and lateral band of anything traffic can queue behind.
struct Entity {
  int id = 0;
  double rear = 0.0;
  double front = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;
  double speed = 0.0;
  bool assisted = false;
};

Entity entity_of(const VehicleState& v) {
  Entity e{v.id, 0.0, 0.0, 0.0, 0.0, v.speed, v.kind == VehicleKind::Assisted};
  const auto corners = v.footprint().corners();
  e.rear = e.front = corners[0].x;
  e.y_lo = e.y_hi = corners[0].y;
  for (const Vec2& c : corners) {
    e.rear = std::min(e.rear, c.x);
    e.front = std::max(e.front, c.x);
    e.y_lo = std::min(e.y_lo, c.y);
    e.y_hi = std::max(e.y_hi, c.y);
  }
  return e;
}

Entity entity_of(const Disc& d) {
  return {-1, d.center.x - d.radius, d.center.x + d.radius, d.center.y - d.radius, d.center.y + d.radius, 0.0, false};
}

constexpr double kBandMargin = 0.1;

bool overlaps(double lo_a, double hi_a, double lo_b, double hi_b) {
  return lo_a < hi_b + kBandMargin && lo_b < hi_a + kBandMargin;
}

/// Lateral band a traffic vehicle claims: both lanes while changing.
std::pair<double, double> claimed_band(const World& world, const VehicleState& v) {
  const double y0 = world.lane_center_offset(v.lane);
  const double y1 = world.lane_center_offset(v.target_lane);
  return {std::min({y0, y1, v.pose.position.y}) - v.half_width, std::max({y0, y1, v.pose.position.y}) + v.half_width};
}

struct Leader {
  double gap = std::numeric_limits<double>::infinity();
  double speed = 0.0;
  double rear = std::numeric_limits<double>::infinity();
  bool found = false;
};

/// Nearest entity in the band whose centre is ahead of x_center. The gap is measured from our front bumper.
Leader leader_in_band(const std::vector<Entity>& entities, int self_id, double x_center, double half_length,
                      double y_lo, double y_hi) {
  Leader l;
  for (const Entity& e : entities) {
    if (e.id >= 0 && e.id == self_id) continue;
    if (!overlaps(y_lo, y_hi, e.y_lo, e.y_hi)) continue;
    if (e.rear + e.front <= 2.0 * x_center) continue;
    const double gap = e.rear - (x_center + half_length);
    if (gap < l.gap) l = {gap, e.speed, e.rear, true};
  }
  return l;
}

/// Nearest entity in the band whose centre is behind x_center; gap measured to our rear bumper.
std::pair<double, const Entity*> follower_in_band(const std::vector<Entity>& entities, int self_id, double x_center,
                                                  double half_length, double y_lo, double y_hi) {
  double best = std::numeric_limits<double>::infinity();
  const Entity* who = nullptr;
  for (const Entity& e : entities) {
    if (e.id >= 0 && e.id == self_id) continue;
    if (!overlaps(y_lo, y_hi, e.y_lo, e.y_hi)) continue;
    if (e.rear + e.front > 2.0 * x_center) continue;
    const double gap = (x_center - half_length) - e.front;
    if (gap < best) {
      best = gap;
      who = &e;
    }
  }
  return {best, who};
}

double desired_speed(const World& world, const VehicleState& v, const KinematicsConfig& kin, double a) {
  const double x = v.pose.position.x;
  double target = zone_speed(world, x, kin) * v.desired_factor;
  if (x < world.works.start_s) {
    const double d = world.works.start_s - x;
    target = std::min(target, std::sqrt(kin.works_speed * kin.works_speed * v.desired_factor * v.desired_factor +
                                        2.0 * a * d));
  }
  return target;
}

}  // namespace

void step_traffic(const World& world, TrafficState& traffic, const std::vector<VehicleState>& assisted,
                  const KinematicsConfig& kin, const TrafficConfig& cfg, double clock, double dt) {
  auto& cars = traffic.vehicles;
  const double a = kin.planning_decel;

  std::vector<Entity> entities;
  entities.reserve(cars.size() + assisted.size() + world.obstacles.size());
  for (const Disc& d : world.obstacles) entities.push_back(entity_of(d));
  for (const VehicleState& v : assisted) entities.push_back(entity_of(v));
  const std::size_t first_car = entities.size();
  for (const VehicleState& v : cars) {
    Entity e = entity_of(v);
    std::tie(e.y_lo, e.y_hi) = claimed_band(world, v);
    entities.push_back(e);
  }

  // Longitudinal update from the state at the start of the tick.
  std::vector<VehicleState> next = cars;
  for (std::size_t i = 0; i < cars.size(); ++i) {
    const VehicleState& v = cars[i];
    VehicleState& n = next[i];
    const auto [y_lo, y_hi] = claimed_band(world, v);
    const double x = v.pose.position.x;
    const Leader lead = leader_in_band(entities, v.id, x, v.half_length, y_lo, y_hi);

    double target = desired_speed(world, v, kin, a);
    if (lead.found) {
      const double g = lead.gap - cfg.standstill_gap_m;
      target = std::min(target, std::sqrt(std::max(0.0, lead.speed * lead.speed + 2.0 * a * g)));
      if (lead.gap < v.speed * cfg.headway_s) {
        target = std::min(target, lead.speed + std::max(0.0, g) / cfg.headway_s);
      }
    }
    double speed = std::min(v.speed + kin.max_accel * dt, target);
    speed = std::max({0.0, speed, v.speed - cfg.emergency_decel * dt});
    if (lead.found && lead.gap - cfg.standstill_gap_m <= 0.0) speed = std::min(speed, lead.speed);
    double nx = x + speed * dt;
    if (lead.found) {
      // A follower that starts outside the standstill gap never closes into it; the hard floor covers cut-ins.
      const double soft = lead.rear - cfg.standstill_gap_m - v.half_length;
      const double limit = x <= soft ? soft : lead.rear - cfg.min_gap_m - v.half_length;
      if (nx > limit) {
        nx = std::max(x, limit);
        speed = std::min(speed, lead.speed);
        if (nx == x) speed = 0.0;
      }
    }
    n.pose.position.x = nx;
    n.speed = speed;

    if (v.changing_lane()) {
      n.lane_change_elapsed = v.lane_change_elapsed + dt;
      const double frac = std::min(1.0, n.lane_change_elapsed / cfg.lane_change_s);
      const double y0 = world.lane_center_offset(v.lane);
      const double y1 = world.lane_center_offset(v.target_lane);
      n.pose.position.y = y0 + (y1 - y0) * frac;
      if (frac >= 1.0) {
        n.lane = v.target_lane;
        n.lane_change_elapsed = 0.0;
        n.pose.position.y = y1;
      }
    }
  }

  // Lane-change decisions against the updated positions.
  for (std::size_t i = 0; i < next.size(); ++i) {
    VehicleState& v = next[i];
    if (v.changing_lane()) continue;
    const double x = v.pose.position.x;
    const double finish_x = x + std::max(v.speed, kin.works_speed) * cfg.lane_change_s + v.half_length + 5.0;
    const bool before_works = finish_x < world.works.start_s;
    const bool after_works = x - v.half_length > world.works.end_s;
    if (!before_works && !after_works) continue;

    auto blocked_ahead = [&](int lane) { return before_works && world.lane_blocked(lane); };
    std::vector<int> options;
    if (before_works && world.lane_blocked(v.lane) && world.works.start_s - x < cfg.mandatory_lookahead_m) {
      const auto open = world.passable_lanes_at(world.works.start_s);
      int best = open.front();
      for (int l : open) {
        if (std::abs(l - v.lane) < std::abs(best - v.lane)) best = l;
      }
      options.push_back(v.lane + (best > v.lane ? 1 : -1));
    } else {
      const double y = world.lane_center_offset(v.lane);
      const Leader lead = leader_in_band(entities, v.id, x, v.half_length, y - v.half_width, y + v.half_width);
      const double want = desired_speed(world, v, kin, a);
      if (lead.found && lead.gap < cfg.slow_leader_range_m && lead.speed < cfg.slow_leader_ratio * want) {
        for (int l : {v.lane - 1, v.lane + 1}) {
          if (l >= 0 && l < world.config.lane_count && !blocked_ahead(l)) options.push_back(l);
        }
      }
    }

    for (int l : options) {
      const double y = world.lane_center_offset(l);
      const double lo = std::min(y, v.pose.position.y) - v.half_width;
      const double hi = std::max(y, v.pose.position.y) + v.half_width;
      // Gaps against the already-updated neighbours.
      std::vector<Entity> now(entities.begin(), entities.begin() + static_cast<std::ptrdiff_t>(first_car));
      for (const VehicleState& o : next) {
        Entity e = entity_of(o);
        std::tie(e.y_lo, e.y_hi) = claimed_band(world, o);
        now.push_back(e);
      }
      const Leader ahead = leader_in_band(now, v.id, x, v.half_length, lo, hi);
      const auto [gap_behind, behind] = follower_in_band(now, v.id, x, v.half_length, lo, hi);
      const double need_ahead = std::max(8.0, v.speed * 0.8);
      if (ahead.found && ahead.gap < need_ahead) continue;
      if (behind) {
        const double closing = std::max(0.0, behind->speed - v.speed);
        double need_behind = 8.0 + closing * cfg.lane_change_s +
                             std::max(0.0, behind->speed * behind->speed - v.speed * v.speed) / (2.0 * a);
        if (behind->assisted) need_behind = std::max(need_behind, cfg.courtesy_gap_m);
        if (gap_behind < need_behind) continue;
      }
      v.target_lane = l;
      v.lane_change_elapsed = 0.0;
      break;
    }
  }

  std::erase_if(next, [&](const VehicleState& v) {
    return v.pose.position.x > world.config.road_end_m - cfg.despawn_margin_m;
  });

  // Arrivals behind the assisted vehicles.
  if (cfg.enabled && clock + dt >= traffic.next_spawn) {
    const int lane = traffic.rng.pick(world.config.lane_count);
    const double factor = 1.0 - cfg.desired_spread * traffic.rng.uniform();
    traffic.next_spawn += traffic.rng.exponential(cfg.mean_interarrival_s);
    const double y = world.lane_center_offset(lane);
    bool clear = true;
    double lead_speed = std::numeric_limits<double>::infinity();
    double lead_gap = std::numeric_limits<double>::infinity();
    for (const VehicleState& o : next) {
      const auto [lo, hi] = claimed_band(world, o);
      if (!overlaps(lo, hi, y - kin.half_width, y + kin.half_width)) continue;
      const double dx = o.pose.position.x - cfg.spawn_x;
      if (std::abs(dx) < cfg.spawn_clearance_m) clear = false;
      if (dx > 0 && dx < lead_gap) {
        lead_gap = dx;
        lead_speed = o.speed;
      }
    }
    for (const VehicleState& o : assisted) {
      if (std::abs(o.pose.position.x - cfg.spawn_x) < cfg.spawn_clearance_m) clear = false;
    }
    if (clear) {
      VehicleState car;
      car.id = traffic.next_id++;
      car.kind = VehicleKind::Traffic;
      car.lane = lane;
      car.target_lane = lane;
      car.desired_factor = factor;
      car.half_length = kin.half_length;
      car.half_width = kin.half_width;
      car.pose = {{cfg.spawn_x, y}, 0.0};
      double speed = kin.approach_speed * factor;
      if (lead_gap < std::numeric_limits<double>::infinity()) {
        speed = std::min(speed, std::sqrt(std::max(0.0, lead_speed * lead_speed + 2.0 * a * (lead_gap - 2.0 * kin.half_length - cfg.standstill_gap_m))));
      }
      car.speed = speed;
      next.push_back(car);
    }
  }

  cars = std::move(next);
}

}  // namespace rasim
