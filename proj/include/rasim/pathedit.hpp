#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "rasim/geometry.hpp"
#include "rasim/world.hpp"

namespace rasim {

enum class PathSource { Initial, Waypoint, Trajectory, PathPlan };
std::string_view to_string(PathSource source);

/// Ordered waypoints the vehicle follows. Waypoints at or before `committed_index` have been passed and
/// are never modified by edits.
struct PlannedPath {
  std::vector<Vec2> waypoints;
  std::size_t committed_index = 0;
  PathSource source = PathSource::Initial;

  std::size_t size() const { return waypoints.size(); }
  Polyline polyline() const { return Polyline(waypoints); }
  double length() const;
  /// Arc length of the committed waypoint.
  double committed_s() const;

  bool operator==(const PlannedPath&) const = default;
};

/// Straight path of `length` metres starting at `start` along `heading`, sampled every `spacing`.
PlannedPath straight_path(Vec2 start, double heading, double length, double spacing = 10.0);

/// Minimum interior angle for any vertex after the committed waypoint. Angles at or below this are rejected.
inline constexpr double kMinInteriorAngleDeg = 90.0;
/// Margin above the minimum, so accepted angles stay strictly above 90 degrees despite rounding.
inline constexpr double kAngleToleranceDeg = 1e-9;

/// True when every vertex strictly after `committed_index` has an interior angle above 90 degrees.
bool angles_ok(const PlannedPath& path);

/// Removes uncommitted vertices until angles_ok holds, scanning forward from the committed waypoint.
void enforce_angles(PlannedPath& path);

enum class Rejection {
  AngleTooSharp,
  OutOfView,
  CommittedSegment,
  IndexOutOfRange,
  StaleSelection,
  EmptyTrajectory,
  NotMain,
  WrongConcept,
  NoStroke,
};
std::string_view to_string(Rejection r);
Rejection rejection_from_string(std::string_view text);

template <class T>
using Edit = std::variant<T, Rejection>;

template <class T>
bool accepted(const Edit<T>& e) {
  return std::holds_alternative<T>(e);
}

/// Foot point on the nearest lane centerline (control-key snapping).
Vec2 snap_to_lane(const World& world, Vec2 p);

/// Appends a waypoint. Rejected when p is outside the view window around `vehicle` or the interior angle at
/// the previous last waypoint would be <= 90 degrees.
Edit<PlannedPath> waypoint_place(const PlannedPath& path, Vec2 p, bool snap, const World& world, Vec2 vehicle);

struct InsertBetween {
  std::size_t index;  // new point lands at this index, between waypoints index-1 and index
  Vec2 point;
};
struct Move {
  std::size_t index;
  Vec2 point;
};
struct Delete {
  std::size_t index;
};
using WaypointEdit = std::variant<InsertBetween, Move, Delete>;

Edit<PlannedPath> waypoint_edit(const PlannedPath& path, const WaypointEdit& edit, bool snap, const World& world,
                                Vec2 vehicle);

struct StrokeSample {
  Vec2 point;
  double t = 0.0;
};

/// A mouse drag. Timestamps strictly increase.
struct Stroke {
  std::vector<StrokeSample> samples;
  bool snap_mode = false;
};

inline constexpr double kDefaultTrajectorySpacing = 2.0;

/// Turns a drag into equidistant waypoints. Candidate waypoints that would form an interior angle <= 90 degrees
/// with the last two accepted ones are dropped and drawing continues.
Edit<Polyline> stroke_to_trajectory(const Stroke& stroke, double spacing, const World& world);

enum class MergeKind { Extension, Replacement, ParallelReplacement, Standalone };
std::string_view to_string(MergeKind kind);

/// How a newly drawn line combines with the existing path. Attach positions are arc lengths on the old path;
/// `attach_points` are the matching segment indices.
struct MergeClass {
  MergeKind kind = MergeKind::Standalone;
  std::vector<std::size_t> attach_points;
  std::vector<double> attach_s;
  bool from_start = true;  // Extension: the new line's start is the attached end
  bool reversed = false;   // Replacement: the new line was drawn against the old path's direction
};

struct MergeThresholds {
  double near_m = 3.5;
  double parallel_m = 1.0;
  double parallel_fraction = 0.8;
  double parallel_angle_deg = 15.0;
};

MergeClass classify_merge(const PlannedPath& old_path, const Polyline& new_line, const MergeThresholds& th = {});

/// Applies a classification. Never fails; junctions that would break the angle rule are smoothed by dropping
/// uncommitted vertices.
PlannedPath apply_merge(const PlannedPath& old_path, const Polyline& new_line, const MergeClass& cls);

/// Replaces everything after the committed prefix with `pose` followed by `shape`. The pose becomes the new
/// committed waypoint, so reversing shapes do not trip the angle rule at the cusp.
PlannedPath adopt_from_pose(const PlannedPath& old_path, Vec2 pose, const PlannedPath& shape, PathSource source);

struct CandidateConfig {
  double horizon_m = 185.0;
  double standoff_m = 5.0;
  double blend_m = 30.0;
  double sample_spacing_m = 5.0;
  double clip_step_m = 0.25;
  double min_length_m = 1.0;
  double vehicle_half_length = 2.25;
  double vehicle_half_width = 1.0;
  double reverse_straight_m = 15.0;
  double reverse_radius_m = 10.0;
  double reverse_sweep_deg = 45.0;

  bool operator==(const CandidateConfig&) const = default;
};

struct Candidate {
  int lane = -1;  // -1 for reverse shapes
  PlannedPath path;
};

struct CandidateSet {
  std::vector<Candidate> forward;
  std::vector<Candidate> reverse;
  std::int64_t generation_tick = 0;
};

/// First arc length along `line` at which a vehicle footprint centred on the line touches an obstacle, or
/// nullopt when the line is clear.
std::optional<double> first_contact(const Polyline& line, const std::vector<Disc>& obstacles, const CandidateConfig& cfg);

/// One forward candidate per lane open at the vehicle's position (at most three, two inside the works), each
/// clipped to the horizon and to the first obstacle contact minus the standoff.
CandidateSet generate_candidates(const World& world, const Pose& vehicle, std::int64_t tick,
                                 const CandidateConfig& cfg = {});

/// Straight back, back-left arc and back-right arc relative to the vehicle pose.
std::vector<Candidate> generate_reverse_candidates(const Pose& vehicle, const CandidateConfig& cfg = {});

Edit<PlannedPath> select_candidate(const CandidateSet& set, std::size_t index, bool reverse,
                                   std::int64_t shown_generation);

}  // namespace rasim
