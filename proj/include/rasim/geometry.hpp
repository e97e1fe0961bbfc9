#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rasim {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
  friend constexpr Vec2 operator*(double k, Vec2 a) { return {a.x * k, a.y * k}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 unit_from_heading(double heading) { return {std::cos(heading), std::sin(heading)}; }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct Pose {
  Vec2 position;
  double heading = 0.0;  // radians, 0 = +x (downstream)
  bool operator==(const Pose&) const = default;
};

/// Closest point on segment [a, b] to p.
struct SegmentFoot {
  Vec2 point;
  double t = 0.0;  // 0 at a, 1 at b
  double distance = 0.0;
};
SegmentFoot closest_on_segment(Vec2 p, Vec2 a, Vec2 b);

/// Interior angle at b of the triangle a-b-c in degrees, in [0, 180].
/// 180 is a straight continuation, 0 an exact reversal. Throws DegenerateInput when a == b or b == c.
double interior_angle(Vec2 a, Vec2 b, Vec2 c);

/// Ordered point sequence with cumulative arc length.
/// Invariant: at least one point, no two consecutive points coincide.
class Polyline {
public:
  Polyline() = default;
  /// Throws DegenerateInput if two consecutive points coincide or the list is empty.
  explicit Polyline(std::vector<Vec2> points);

  /// Builds a polyline, silently dropping points closer than `min_gap` to their predecessor.
  static Polyline dedup(std::span<const Vec2> points, double min_gap = 1e-9);

  const std::vector<Vec2>& points() const noexcept { return points_; }
  const std::vector<double>& cumulative_s() const noexcept { return cumulative_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  double length() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  Vec2 front() const { return points_.front(); }
  Vec2 back() const { return points_.back(); }

  /// Point at arc length s (clamped to [0, length]).
  Vec2 at(double s) const;
  /// Unit tangent at arc length s; uses the segment containing s.
  Vec2 tangent_at(double s) const;

  struct Projection {
    double s = 0.0;
    Vec2 foot;
    double distance = 0.0;
    std::size_t segment = 0;  // index of the segment's first point
  };
  /// Nearest point over the whole polyline. Ties resolve to the smallest arc length.
  Projection project(Vec2 p) const;
  /// Nearest point restricted to arc lengths in [s_from, s_to].
  Projection project(Vec2 p, double s_from, double s_to) const;

  /// Index of the segment containing arc length s.
  std::size_t segment_at(double s) const;

  /// Sub-polyline over arc lengths [s0, s1].
  Polyline slice(double s0, double s1) const;

private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

/// Resamples at equal arc-length stations 0, spacing, 2*spacing, ..., keeping the final point.
/// Output points lie on the input line; when spacing >= length only the endpoints remain.
/// Throws DegenerateInput for spacing <= 0 or fewer than two input points.
Polyline resample_equidistant(const Polyline& line, double spacing);

/// Arc-length stations (along the input) of the points resample_equidistant returns.
std::vector<double> resample_stations(const Polyline& line, double spacing);

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

/// Rectangle footprint centered on `center`, long axis along `heading`.
struct OrientedRect {
  Vec2 center;
  double heading = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;

  std::array<Vec2, 4> corners() const;
  bool contains(Vec2 p) const;
  /// Distance from p to the rectangle (0 inside).
  double distance_to(Vec2 p) const;
};

bool intersects(const OrientedRect& r, const Disc& d);
bool intersects(const OrientedRect& a, const OrientedRect& b);
/// Minimum distance between two rectangles (0 when they intersect).
double distance(const OrientedRect& a, const OrientedRect& b);

/// Even-odd point-in-polygon test.
bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);

}  // namespace rasim
