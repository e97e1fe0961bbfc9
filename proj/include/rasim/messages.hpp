#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rasim/dynamics.hpp"
#include "rasim/geometry.hpp"

namespace rasim {

inline constexpr const char* kProtocolVersion = "1";

enum class Slot { Main, Secondary, Queue };
enum class RequestState { Queued, Main, Secondary, Resolved, Missed };
enum class Concept { Any, Waypoint, Trajectory, PathPlan };
enum class Focus { VehicleFocus, PathEndFocus, Lock };
enum class Aoi { RequestPanel, InfoPanel, MainPanel, SecondaryPanel };
enum class EditOp { Insert, Move, Delete };

std::string_view to_string(Slot s);
std::string_view to_string(RequestState s);
std::string_view to_string(Concept c);
std::string_view to_string(Focus f);
std::string_view to_string(Aoi a);
std::string_view to_string(EditOp op);
Slot slot_from_string(std::string_view s);
RequestState request_state_from_string(std::string_view s);
Concept concept_from_string(std::string_view s);
Focus focus_from_string(std::string_view s);
Aoi aoi_from_string(std::string_view s);
EditOp edit_op_from_string(std::string_view s);

inline bool is_terminal(RequestState s) { return s == RequestState::Resolved || s == RequestState::Missed; }

// Client -> server. Every message carries the client timestamp `t` in seconds. Path inputs address the request
// in the Main slot.

struct SlotAssign {
  double t = 0.0;
  int request_id = 0;
  Slot slot = Slot::Main;
  bool operator==(const SlotAssign&) const = default;
};
struct WaypointPlace {
  double t = 0.0;
  Vec2 point;
  bool snap = false;
  bool operator==(const WaypointPlace&) const = default;
};
struct WaypointEditMsg {
  double t = 0.0;
  EditOp op = EditOp::Move;
  std::size_t index = 0;
  Vec2 point;  // unused for Delete
  bool snap = false;
  bool operator==(const WaypointEditMsg&) const = default;
};
struct StrokeBegin {
  double t = 0.0;
  Vec2 point;
  bool snap = false;
  bool operator==(const StrokeBegin&) const = default;
};
struct StrokeSampleMsg {
  double t = 0.0;
  Vec2 point;
  bool operator==(const StrokeSampleMsg&) const = default;
};
struct StrokeEnd {
  double t = 0.0;
  Vec2 point;
  bool operator==(const StrokeEnd&) const = default;
};
struct CandidateSelect {
  double t = 0.0;
  std::size_t index = 0;
  bool reverse = false;
  std::int64_t generation = 0;
  bool operator==(const CandidateSelect&) const = default;
};
struct FocusToggle {
  double t = 0.0;
  Focus focus = Focus::VehicleFocus;
  bool on = false;
  bool operator==(const FocusToggle&) const = default;
};
struct ViewDrag {
  double t = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  bool operator==(const ViewDrag&) const = default;
};
struct PointerMoved {
  double t = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double px_per_cm = 37.8;
  bool operator==(const PointerMoved&) const = default;
};
struct AoiChange {
  double t = 0.0;
  Aoi area = Aoi::MainPanel;
  bool enter = true;
  bool operator==(const AoiChange&) const = default;
};

using ClientMessage = std::variant<SlotAssign, WaypointPlace, WaypointEditMsg, StrokeBegin, StrokeSampleMsg, StrokeEnd,
                                   CandidateSelect, FocusToggle, ViewDrag, PointerMoved, AoiChange>;

/// Wire tag of a client message, e.g. "waypoint_place".
std::string_view message_tag(const ClientMessage& m);

/// True for messages that modify a vehicle path.
bool is_path_input(const ClientMessage& m);

// Server -> client.

struct Hello {
  std::string protocol_version = kProtocolVersion;
  std::string config_json;  // serialized episode config
  bool operator==(const Hello&) const = default;
};

struct VehicleView {
  int id = 0;
  Pose pose;
  double speed = 0.0;
  bool operator==(const VehicleView&) const = default;
};

struct CandidateView {
  int lane = -1;
  std::vector<Vec2> waypoints;
  bool operator==(const CandidateView&) const = default;
};

struct RequestView {
  int id = 0;
  int vehicle_id = 0;
  RequestState state = RequestState::Queued;
  std::optional<Slot> slot;
  std::string reason;
  Side side = Side::Left;
  double origin_s = 0.0;
  Pose pose;
  double speed = 0.0;
  std::vector<Vec2> path;
  std::size_t committed_index = 0;
  std::int64_t candidate_generation = -1;
  std::vector<CandidateView> forward;
  std::vector<CandidateView> reverse;
  Proximity proximity;
  bool stopped_by_collision = false;
  bool needs_action = false;
  double progress_max = 0.0;
  int path_inputs = 0;
  std::vector<VehicleView> traffic;
  bool operator==(const RequestView&) const = default;
};

struct Snapshot {
  std::int64_t tick = 0;
  double clock = 0.0;
  std::vector<RequestView> requests;
  std::vector<std::string> announcements;
  bool operator==(const Snapshot&) const = default;
};

struct ResolvedMsg {
  int request_id = 0;
  double clock = 0.0;
  bool operator==(const ResolvedMsg&) const = default;
};

struct EpisodeEnd {
  std::string summary_json;
  bool operator==(const EpisodeEnd&) const = default;
};

struct ErrorMsg {
  std::string message;
  bool operator==(const ErrorMsg&) const = default;
};

struct RejectedMsg {
  double t = 0.0;
  std::string what;  // message type tag
  Rejection reason = Rejection::AngleTooSharp;
  bool operator==(const RejectedMsg&) const = default;
};

using ServerMessage = std::variant<Hello, Snapshot, ResolvedMsg, EpisodeEnd, ErrorMsg, RejectedMsg>;

}  // namespace rasim
