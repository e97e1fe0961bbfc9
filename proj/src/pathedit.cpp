#include "rasim/pathedit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rasim/errors.hpp"

namespace rasim {

std::string_view to_string(PathSource source) {
  switch (source) {
    case PathSource::Initial: return "initial";
    case PathSource::Waypoint: return "waypoint";
    case PathSource::Trajectory: return "trajectory";
    case PathSource::PathPlan: return "pathplan";
  }
  return "initial";
}

std::string_view to_string(Rejection r) {
  switch (r) {
    case Rejection::AngleTooSharp: return "angle_too_sharp";
    case Rejection::OutOfView: return "out_of_view";
    case Rejection::CommittedSegment: return "committed_segment";
    case Rejection::IndexOutOfRange: return "index_out_of_range";
    case Rejection::StaleSelection: return "stale_selection";
    case Rejection::EmptyTrajectory: return "empty_trajectory";
    case Rejection::NotMain: return "not_main";
    case Rejection::WrongConcept: return "wrong_concept";
    case Rejection::NoStroke: return "no_stroke";
  }
  return "angle_too_sharp";
}

Rejection rejection_from_string(std::string_view text) {
  for (auto r : {Rejection::AngleTooSharp, Rejection::OutOfView, Rejection::CommittedSegment,
                 Rejection::IndexOutOfRange, Rejection::StaleSelection, Rejection::EmptyTrajectory,
                 Rejection::NotMain, Rejection::WrongConcept, Rejection::NoStroke}) {
    if (to_string(r) == text) return r;
  }
  throw std::invalid_argument("unknown rejection '" + std::string(text) + "'");
}

std::string_view to_string(MergeKind kind) {
  switch (kind) {
    case MergeKind::Extension: return "extension";
    case MergeKind::Replacement: return "replacement";
    case MergeKind::ParallelReplacement: return "parallel_replacement";
    case MergeKind::Standalone: return "standalone";
  }
  return "standalone";
}

double PlannedPath::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) len += distance(waypoints[i - 1], waypoints[i]);
  return len;
}

double PlannedPath::committed_s() const {
  double s = 0.0;
  for (std::size_t i = 1; i <= committed_index && i < waypoints.size(); ++i) {
    s += distance(waypoints[i - 1], waypoints[i]);
  }
  return s;
}

PlannedPath straight_path(Vec2 start, double heading, double length, double spacing) {
  PlannedPath path;
  const Vec2 dir = unit_from_heading(heading);
  const auto n = static_cast<int>(std::ceil(length / spacing - 1e-9));
  for (int k = 0; k < n; ++k) path.waypoints.push_back(start + dir * (k * spacing));
  path.waypoints.push_back(start + dir * length);
  return path;
}

bool angles_ok(const PlannedPath& path) {
  const auto& w = path.waypoints;
  for (std::size_t i = std::max<std::size_t>(path.committed_index + 1, 1); i + 1 < w.size(); ++i) {
    if (w[i - 1] == w[i] || w[i] == w[i + 1]) return false;
    if (interior_angle(w[i - 1], w[i], w[i + 1]) <= kMinInteriorAngleDeg + kAngleToleranceDeg) return false;
  }
  return true;
}

namespace {

constexpr double kCoincident = 1e-6;

void drop_coincident(std::vector<Vec2>& pts, std::size_t keep_through) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > keep_through && !out.empty() && distance(out.back(), pts[i]) <= kCoincident) continue;
    out.push_back(pts[i]);
  }
  pts = std::move(out);
}

}  // namespace

void enforce_angles(PlannedPath& path) {
  auto& w = path.waypoints;
  drop_coincident(w, path.committed_index);
  const std::size_t first = std::max<std::size_t>(path.committed_index + 1, 1);
  std::size_t i = first;
  while (i + 1 < w.size()) {
    if (interior_angle(w[i - 1], w[i], w[i + 1]) > kMinInteriorAngleDeg + kAngleToleranceDeg) {
      ++i;
      continue;
    }
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(i));
    while (i < w.size() && distance(w[i - 1], w[i]) <= kCoincident) {
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(i));
    }
    if (i > first) --i;
  }
}

Vec2 snap_to_lane(const World& world, Vec2 p) { return nearest_lane_center(world, p).foot; }

namespace {

std::optional<Vec2> resolve_point(const World& world, Vec2 p, bool snap) {
  if (!snap) return p;
  try {
    return snap_to_lane(world, p);
  } catch (const OutOfRoad&) {
    return std::nullopt;
  }
}

bool in_view(const World& world, Vec2 p, Vec2 vehicle) { return distance(p, vehicle) <= world.view_range_m; }

}  // namespace

Edit<PlannedPath> waypoint_place(const PlannedPath& path, Vec2 p, bool snap, const World& world, Vec2 vehicle) {
  if (!in_view(world, p, vehicle)) return Rejection::OutOfView;
  const auto q = resolve_point(world, p, snap);
  if (!q) return Rejection::OutOfView;
  PlannedPath out = path;
  out.source = PathSource::Waypoint;
  const auto& w = path.waypoints;
  if (!w.empty()) {
    if (distance(w.back(), *q) <= kCoincident) return Rejection::AngleTooSharp;
    if (w.size() >= 2 && interior_angle(w[w.size() - 2], w.back(), *q) <= kMinInteriorAngleDeg + kAngleToleranceDeg) {
      return Rejection::AngleTooSharp;
    }
  }
  out.waypoints.push_back(*q);
  return out;
}

Edit<PlannedPath> waypoint_edit(const PlannedPath& path, const WaypointEdit& edit, bool snap, const World& world,
                                Vec2 vehicle) {
  PlannedPath out = path;
  out.source = PathSource::Waypoint;
  auto& w = out.waypoints;
  auto check_index = [&](std::size_t i) -> std::optional<Rejection> {
    if (i <= path.committed_index) return Rejection::CommittedSegment;
    if (i >= path.waypoints.size()) return Rejection::IndexOutOfRange;
    return std::nullopt;
  };
  auto neighbours_distinct = [&](std::size_t i) {
    return (i == 0 || distance(w[i - 1], w[i]) > kCoincident) &&
           (i + 1 >= w.size() || distance(w[i], w[i + 1]) > kCoincident);
  };

  if (const auto* ins = std::get_if<InsertBetween>(&edit)) {
    if (auto r = check_index(ins->index)) return *r;
    if (!in_view(world, ins->point, vehicle)) return Rejection::OutOfView;
    const auto q = resolve_point(world, ins->point, snap);
    if (!q) return Rejection::OutOfView;
    w.insert(w.begin() + static_cast<std::ptrdiff_t>(ins->index), *q);
    if (!neighbours_distinct(ins->index)) return Rejection::AngleTooSharp;
  } else if (const auto* mv = std::get_if<Move>(&edit)) {
    if (auto r = check_index(mv->index)) return *r;
    if (!in_view(world, mv->point, vehicle)) return Rejection::OutOfView;
    const auto q = resolve_point(world, mv->point, snap);
    if (!q) return Rejection::OutOfView;
    w[mv->index] = *q;
    if (!neighbours_distinct(mv->index)) return Rejection::AngleTooSharp;
  } else {
    const auto& del = std::get<Delete>(edit);
    if (auto r = check_index(del.index)) return *r;
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(del.index));
    if (del.index < w.size() && !neighbours_distinct(del.index)) return Rejection::AngleTooSharp;
  }
  if (!angles_ok(out)) return Rejection::AngleTooSharp;
  return out;
}

Edit<Polyline> stroke_to_trajectory(const Stroke& stroke, double spacing, const World& world) {
  if (!(spacing > 0.0)) throw DegenerateInput("trajectory spacing must be positive");
  std::vector<Vec2> accepted;
  const std::size_t n = stroke.samples.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto q = resolve_point(world, stroke.samples[k].point, stroke.snap_mode);
    if (!q) continue;
    if (accepted.empty()) {
      accepted.push_back(*q);
      continue;
    }
    const double d = distance(accepted.back(), *q);
    if (d <= kCoincident) continue;
    if (d < spacing && k + 1 != n) continue;
    if (accepted.size() >= 2 &&
        interior_angle(accepted[accepted.size() - 2], accepted.back(), *q) <= kMinInteriorAngleDeg + kAngleToleranceDeg) {
      continue;
    }
    accepted.push_back(*q);
  }
  if (accepted.size() < 2) return Rejection::EmptyTrajectory;
  const Polyline resampled = resample_equidistant(Polyline(std::move(accepted)), spacing);
  PlannedPath check{resampled.points(), 0, PathSource::Trajectory};
  enforce_angles(check);
  if (check.waypoints.size() < 2) return Rejection::EmptyTrajectory;
  return Polyline(std::move(check.waypoints));
}

namespace {

struct Nearest {
  double distance = std::numeric_limits<double>::infinity();
  double s = 0.0;
  std::size_t segment = 0;
  Vec2 foot;
};

/// Nearest point on the path restricted to segments starting at `from`. Equal distances keep the earliest.
Nearest nearest_on(const std::vector<Vec2>& w, const std::vector<double>& cum, std::size_t from, Vec2 p) {
  Nearest best;
  if (from + 1 >= w.size()) {
    return {distance(p, w[from]), cum[from], from, w[from]};
  }
  for (std::size_t i = from; i + 1 < w.size(); ++i) {
    const SegmentFoot f = closest_on_segment(p, w[i], w[i + 1]);
    if (f.distance < best.distance) best = {f.distance, cum[i] + f.t * (cum[i + 1] - cum[i]), i, f.point};
  }
  return best;
}

/// Smallest angle in degrees between `dir` and any path segment whose distance to p is within 1e-9 of the minimum.
double alignment_deg(const std::vector<Vec2>& w, std::size_t from, Vec2 p, Vec2 dir, double min_dist) {
  double best = 180.0;
  const std::size_t last = w.size() >= 2 ? w.size() - 2 : 0;
  for (std::size_t i = from; i <= last && i + 1 < w.size(); ++i) {
    const SegmentFoot f = closest_on_segment(p, w[i], w[i + 1]);
    if (f.distance > min_dist + 1e-9) continue;
    const Vec2 seg = w[i + 1] - w[i];
    const double ang = std::atan2(std::abs(cross(seg, dir)), dot(seg, dir)) * 180.0 / kPi;
    best = std::min(best, ang);
  }
  return best;
}

std::vector<double> cumulative(const std::vector<Vec2>& w) {
  std::vector<double> cum(w.size(), 0.0);
  for (std::size_t i = 1; i < w.size(); ++i) cum[i] = cum[i - 1] + distance(w[i - 1], w[i]);
  return cum;
}

}  // namespace

MergeClass classify_merge(const PlannedPath& old_path, const Polyline& new_line, const MergeThresholds& th) {
  const auto& w = old_path.waypoints;
  if (w.empty() || new_line.empty()) return {};
  const std::vector<double> cum = cumulative(w);
  const std::size_t from = std::min(old_path.committed_index, w.size() - 1);

  const Nearest a = nearest_on(w, cum, from, new_line.front());
  const Nearest b = nearest_on(w, cum, from, new_line.back());
  const bool near_a = a.distance < th.near_m;
  const bool near_b = b.distance < th.near_m;

  MergeClass out;
  if (near_a && near_b) {
    if (std::abs(a.s - b.s) > 1e-9) {
      out.kind = MergeKind::Replacement;
      out.reversed = a.s > b.s;
      const Nearest& lo = out.reversed ? b : a;
      const Nearest& hi = out.reversed ? a : b;
      out.attach_s = {lo.s, hi.s};
      out.attach_points = {lo.segment, hi.segment};
      return out;
    }
    out.kind = MergeKind::Extension;
    out.from_start = a.distance <= b.distance;
    const Nearest& at = out.from_start ? a : b;
    out.attach_s = {at.s};
    out.attach_points = {at.segment};
    return out;
  }
  if (near_a || near_b) {
    out.kind = MergeKind::Extension;
    out.from_start = near_a;
    const Nearest& at = near_a ? a : b;
    out.attach_s = {at.s};
    out.attach_points = {at.segment};
    return out;
  }

  // Parallel replacement: most samples close to the old path with aligned direction.
  const auto& pts = new_line.points();
  if (pts.size() >= 2 && w.size() >= 2 && from + 1 < w.size()) {
    std::size_t parallel = 0;
    double s_lo = std::numeric_limits<double>::infinity();
    double s_hi = -s_lo;
    std::size_t seg_lo = 0, seg_hi = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Vec2 dir = k + 1 < pts.size() ? pts[k + 1] - pts[k] : pts[k] - pts[k - 1];
      const Nearest n = nearest_on(w, cum, from, pts[k]);
      if (n.distance > th.parallel_m) continue;
      if (alignment_deg(w, from, pts[k], dir, n.distance) > th.parallel_angle_deg) continue;
      ++parallel;
      if (n.s < s_lo) {
        s_lo = n.s;
        seg_lo = n.segment;
      }
      if (n.s > s_hi) {
        s_hi = n.s;
        seg_hi = n.segment;
      }
    }
    if (static_cast<double>(parallel) >= th.parallel_fraction * static_cast<double>(pts.size()) &&
        s_hi - s_lo > 1e-9) {
      out.kind = MergeKind::ParallelReplacement;
      out.attach_s = {s_lo, s_hi};
      out.attach_points = {seg_lo, seg_hi};
      return out;
    }
  }
  out.kind = MergeKind::Standalone;
  return out;
}

namespace {

/// Waypoints strictly before arc length s (always keeping the committed prefix), then the foot at s.
std::vector<Vec2> prefix_until(const PlannedPath& path, const std::vector<double>& cum, double s) {
  const auto& w = path.waypoints;
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i <= path.committed_index || cum[i] < s) out.push_back(w[i]);
  }
  const Vec2 foot = Polyline(w).at(s);
  if (distance(out.back(), foot) > kCoincident) out.push_back(foot);
  return out;
}

/// The foot at s followed by every waypoint strictly after s.
std::vector<Vec2> suffix_from(const PlannedPath& path, const std::vector<double>& cum, double s) {
  const auto& w = path.waypoints;
  std::vector<Vec2> out{Polyline(w).at(s)};
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > path.committed_index && cum[i] > s) out.push_back(w[i]);
  }
  return out;
}

void append(std::vector<Vec2>& dst, const std::vector<Vec2>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

}  // namespace

PlannedPath apply_merge(const PlannedPath& old_path, const Polyline& new_line, const MergeClass& cls) {
  const auto& w = old_path.waypoints;
  const std::vector<double> cum = cumulative(w);
  const double s_c = cum[std::min(old_path.committed_index, w.size() - 1)];
  const std::vector<Vec2> committed(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(old_path.committed_index + 1));
  std::vector<Vec2> line = new_line.points();

  PlannedPath out;
  out.committed_index = old_path.committed_index;
  out.source = PathSource::Trajectory;
  auto& pts = out.waypoints;

  switch (cls.kind) {
    case MergeKind::Extension: {
      const double s = std::max(cls.attach_s.at(0), s_c);
      if (cls.from_start) {
        pts = prefix_until(old_path, cum, s);
        append(pts, line);
      } else {
        pts = committed;
        append(pts, line);
        append(pts, suffix_from(old_path, cum, s));
      }
      break;
    }
    case MergeKind::Replacement: {
      if (cls.reversed) std::reverse(line.begin(), line.end());
      const double lo = std::max(cls.attach_s.at(0), s_c);
      const double hi = std::max(cls.attach_s.at(1), lo);
      pts = prefix_until(old_path, cum, lo);
      append(pts, line);
      append(pts, suffix_from(old_path, cum, hi));
      break;
    }
    case MergeKind::ParallelReplacement: {
      const double lo = std::max(cls.attach_s.at(0), s_c);
      const double hi = std::max(cls.attach_s.at(1), lo);
      const Polyline old_line(w);
      std::vector<Vec2> trimmed;
      for (const Vec2& p : line) {
        if (old_line.project(p, s_c, old_line.length()).s > s_c) trimmed.push_back(p);
      }
      pts = prefix_until(old_path, cum, lo);
      append(pts, trimmed);
      append(pts, suffix_from(old_path, cum, hi));
      break;
    }
    case MergeKind::Standalone:
      pts = committed;
      append(pts, line);
      break;
  }
  enforce_angles(out);
  return out;
}

PlannedPath adopt_from_pose(const PlannedPath& old_path, Vec2 pose, const PlannedPath& shape, PathSource source) {
  PlannedPath out;
  out.source = source;
  const auto& w = old_path.waypoints;
  out.waypoints.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(
                                                  std::min(old_path.committed_index + 1, w.size())));
  if (out.waypoints.empty() || distance(out.waypoints.back(), pose) > kCoincident) out.waypoints.push_back(pose);
  out.committed_index = out.waypoints.size() - 1;
  for (const Vec2& p : shape.waypoints) {
    if (distance(out.waypoints.back(), p) > kCoincident) out.waypoints.push_back(p);
  }
  enforce_angles(out);
  return out;
}

std::optional<double> first_contact(const Polyline& line, const std::vector<Disc>& obstacles,
                                    const CandidateConfig& cfg) {
  if (line.size() < 2 || obstacles.empty()) return std::nullopt;
  // Only obstacles near the line's bounding box can be hit.
  double xmin = line.front().x, xmax = xmin, ymin = line.front().y, ymax = ymin;
  for (const Vec2& p : line.points()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double reach = std::hypot(cfg.vehicle_half_length, cfg.vehicle_half_width);
  std::vector<Disc> nearby;
  for (const Disc& d : obstacles) {
    const double m = reach + d.radius;
    if (d.center.x >= xmin - m && d.center.x <= xmax + m && d.center.y >= ymin - m && d.center.y <= ymax + m) {
      nearby.push_back(d);
    }
  }
  if (nearby.empty()) return std::nullopt;
  const double len = line.length();
  for (double s = 0.0;; s += cfg.clip_step_m) {
    const double at = std::min(s, len);
    const Vec2 c = line.at(at);
    const Vec2 t = line.tangent_at(at);
    const OrientedRect rect{c, std::atan2(t.y, t.x), cfg.vehicle_half_length, cfg.vehicle_half_width};
    for (const Disc& d : nearby) {
      if (distance(c, d.center) > reach + d.radius) continue;
      if (intersects(rect, d)) return at;
    }
    if (at >= len) break;
  }
  return std::nullopt;
}

CandidateSet generate_candidates(const World& world, const Pose& vehicle, std::int64_t tick,
                                 const CandidateConfig& cfg) {
  CandidateSet set;
  set.generation_tick = tick;
  set.reverse = generate_reverse_candidates(vehicle, cfg);

  const Vec2 p0 = vehicle.position;
  std::vector<int> lanes = world.passable_lanes_at(p0.x);
  const std::size_t cap = world.in_works(p0.x) ? 2 : 3;
  if (lanes.size() > cap) {
    std::stable_sort(lanes.begin(), lanes.end(), [&](int a, int b) {
      return std::abs(world.lane_center_offset(a) - p0.y) < std::abs(world.lane_center_offset(b) - p0.y);
    });
    lanes.resize(cap);
    std::sort(lanes.begin(), lanes.end());
  }

  // Cubic Hermite blend from the current lateral offset and heading onto the lane centre.
  const double slope = std::tan(std::clamp(wrap_angle(vehicle.heading), -kPi / 4.0, kPi / 4.0));
  for (int lane : lanes) {
    const double y0 = p0.y;
    const double y1 = world.lane_center_offset(lane);
    const double blend = cfg.blend_m;
    std::vector<Vec2> pts{p0};
    for (double u = cfg.sample_spacing_m; u <= cfg.horizon_m + cfg.sample_spacing_m; u += cfg.sample_spacing_m) {
      double y = y1;
      if (u < blend) {
        const double t = u / blend;
        const double h00 = 2 * t * t * t - 3 * t * t + 1;
        const double h10 = t * t * t - 2 * t * t + t;
        const double h01 = -2 * t * t * t + 3 * t * t;
        y = h00 * y0 + h10 * blend * slope + h01 * y1;
      }
      pts.push_back({p0.x + u, y});
    }
    const Polyline full = Polyline::dedup(pts);
    double len = std::min(cfg.horizon_m, full.length());
    if (const auto contact = first_contact(full.slice(0.0, len), world.obstacles, cfg)) {
      len = std::min(len, *contact - cfg.standoff_m);
    }
    if (len < cfg.min_length_m) continue;
    const Polyline clipped = full.slice(0.0, len);
    set.forward.push_back({lane, PlannedPath{clipped.points(), 0, PathSource::PathPlan}});
  }
  return set;
}

std::vector<Candidate> generate_reverse_candidates(const Pose& vehicle, const CandidateConfig& cfg) {
  auto to_world = [&](Vec2 local) { return vehicle.position + rotate(local, vehicle.heading); };
  std::vector<Candidate> out;

  PlannedPath straight{{}, 0, PathSource::PathPlan};
  const int n_straight = 6;
  for (int k = 0; k <= n_straight; ++k) {
    straight.waypoints.push_back(to_world({-cfg.reverse_straight_m * k / n_straight, 0.0}));
  }
  out.push_back({-1, straight});

  const double sweep = cfg.reverse_sweep_deg * kPi / 180.0;
  const double r = cfg.reverse_radius_m;
  for (double side : {1.0, -1.0}) {
    PlannedPath arc{{}, 0, PathSource::PathPlan};
    const int n_arc = 8;
    for (int k = 0; k <= n_arc; ++k) {
      const double phi = sweep * k / n_arc;
      arc.waypoints.push_back(to_world({-r * std::sin(phi), side * r * (1.0 - std::cos(phi))}));
    }
    out.push_back({-1, arc});
  }
  return out;
}

Edit<PlannedPath> select_candidate(const CandidateSet& set, std::size_t index, bool reverse,
                                   std::int64_t shown_generation) {
  if (shown_generation != set.generation_tick) return Rejection::StaleSelection;
  const auto& list = reverse ? set.reverse : set.forward;
  if (index >= list.size()) return Rejection::IndexOutOfRange;
  return list[index].path;
}

}  // namespace rasim
