#include "rasim/geometry.hpp"

#include <algorithm>
#include <limits>

#include "rasim/errors.hpp"

namespace rasim {

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

SegmentFoot closest_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 foot = a + ab * t;
  return {foot, t, distance(p, foot)};
}

double interior_angle(Vec2 a, Vec2 b, Vec2 c) {
  if (a == b || b == c) throw DegenerateInput("interior_angle: coincident points");
  const Vec2 u = a - b;
  const Vec2 v = c - b;
  return std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / kPi;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.empty()) throw DegenerateInput("polyline needs at least one point");
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double d = distance(points_[i - 1], points_[i]);
    if (!(d > 0.0)) throw DegenerateInput("polyline has coincident consecutive points");
    cumulative_.push_back(cumulative_.back() + d);
  }
}

Polyline Polyline::dedup(std::span<const Vec2> points, double min_gap) {
  std::vector<Vec2> kept;
  kept.reserve(points.size());
  for (const Vec2& p : points) {
    if (kept.empty() || distance(kept.back(), p) > min_gap) kept.push_back(p);
  }
  return Polyline(std::move(kept));
}

std::size_t Polyline::segment_at(double s) const {
  if (points_.size() < 2) return 0;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t idx = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return std::min(idx, points_.size() - 2);
}

Vec2 Polyline::at(double s) const {
  if (points_.size() == 1) return points_.front();
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_at(s);
  const double seg = cumulative_[i + 1] - cumulative_[i];
  const double t = (s - cumulative_[i]) / seg;
  if (t >= 1.0) return points_[i + 1];
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

Vec2 Polyline::tangent_at(double s) const {
  if (points_.size() < 2) return {1.0, 0.0};
  const std::size_t i = segment_at(std::clamp(s, 0.0, length()));
  const Vec2 d = points_[i + 1] - points_[i];
  return d * (1.0 / norm(d));
}

Polyline::Projection Polyline::project(Vec2 p) const {
  return project(p, 0.0, length());
}

Polyline::Projection Polyline::project(Vec2 p, double s_from, double s_to) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (points_.size() == 1) {
    return {0.0, points_.front(), distance(p, points_.front()), 0};
  }
  s_from = std::clamp(s_from, 0.0, length());
  s_to = std::clamp(s_to, s_from, length());
  const std::size_t first = segment_at(s_from);
  const std::size_t last = segment_at(s_to);
  for (std::size_t i = first; i <= last; ++i) {
    const double seg_len = cumulative_[i + 1] - cumulative_[i];
    const double lo = std::max(s_from, cumulative_[i]);
    const double hi = std::min(s_to, cumulative_[i + 1]);
    if (hi < lo) continue;
    const Vec2 a = points_[i] + (points_[i + 1] - points_[i]) * ((lo - cumulative_[i]) / seg_len);
    const Vec2 b = points_[i] + (points_[i + 1] - points_[i]) * ((hi - cumulative_[i]) / seg_len);
    const SegmentFoot f = closest_on_segment(p, a, b);
    if (f.distance < best.distance) {
      best = {lo + f.t * (hi - lo), f.point, f.distance, i};
    }
  }
  return best;
}

Polyline Polyline::slice(double s0, double s1) const {
  s0 = std::clamp(s0, 0.0, length());
  s1 = std::clamp(s1, s0, length());
  std::vector<Vec2> out{at(s0)};
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (cumulative_[i] > s0 && cumulative_[i] < s1) out.push_back(points_[i]);
  }
  out.push_back(at(s1));
  return dedup(out);
}

std::vector<double> resample_stations(const Polyline& line, double spacing) {
  if (!(spacing > 0.0)) throw DegenerateInput("resample spacing must be positive");
  if (line.size() < 2) throw DegenerateInput("resample needs at least two points");
  const double total = line.length();
  std::vector<double> stations{0.0};
  if (spacing < total) {
    for (std::size_t k = 1;; ++k) {
      const double s = static_cast<double>(k) * spacing;
      if (s >= total - 1e-9) break;
      stations.push_back(s);
    }
  }
  stations.push_back(total);
  return stations;
}

Polyline resample_equidistant(const Polyline& line, double spacing) {
  const std::vector<double> stations = resample_stations(line, spacing);
  std::vector<Vec2> pts;
  pts.reserve(stations.size());
  for (double s : stations) pts.push_back(line.at(s));
  pts.front() = line.front();
  pts.back() = line.back();
  return Polyline::dedup(pts);
}

std::array<Vec2, 4> OrientedRect::corners() const {
  const Vec2 f = unit_from_heading(heading) * half_length;
  const Vec2 l = Vec2{-std::sin(heading), std::cos(heading)} * half_width;
  return {center + f + l, center + f - l, center - f - l, center - f + l};
}

bool OrientedRect::contains(Vec2 p) const {
  const Vec2 local = rotate(p - center, -heading);
  return std::abs(local.x) <= half_length && std::abs(local.y) <= half_width;
}

double OrientedRect::distance_to(Vec2 p) const {
  const Vec2 local = rotate(p - center, -heading);
  const double dx = std::max(0.0, std::abs(local.x) - half_length);
  const double dy = std::max(0.0, std::abs(local.y) - half_width);
  return std::hypot(dx, dy);
}

bool intersects(const OrientedRect& r, const Disc& d) {
  return r.distance_to(d.center) <= d.radius;
}

namespace {

bool separated_on_axis(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b, Vec2 axis) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const Vec2& p : a) {
    const double v = dot(p, axis);
    amin = std::min(amin, v);
    amax = std::max(amax, v);
  }
  for (const Vec2& p : b) {
    const double v = dot(p, axis);
    bmin = std::min(bmin, v);
    bmax = std::max(bmax, v);
  }
  return amax < bmin || bmax < amin;
}

}  // namespace

bool intersects(const OrientedRect& a, const OrientedRect& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Vec2 axes[4] = {unit_from_heading(a.heading), unit_from_heading(a.heading + kPi / 2),
                        unit_from_heading(b.heading), unit_from_heading(b.heading + kPi / 2)};
  for (const Vec2& axis : axes) {
    if (separated_on_axis(ca, cb, axis)) return false;
  }
  return true;
}

double distance(const OrientedRect& a, const OrientedRect& b) {
  if (intersects(a, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& p : a.corners()) best = std::min(best, b.distance_to(p));
  for (const Vec2& p : b.corners()) best = std::min(best, a.distance_to(p));
  return best;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace rasim
