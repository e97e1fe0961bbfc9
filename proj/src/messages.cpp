#include "rasim/messages.hpp"

#include <array>
#include <iterator>
#include <string_view>
#include <variant>
#include <stdexcept>
#include <string>
#include <utility>

namespace rasim {

namespace {

template <class E, std::size_t N>
std::string_view name_of(E value, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "unknown";
}

template <class E, std::size_t N>
E value_of(std::string_view text, const std::array<std::pair<E, std::string_view>, N>& table, const char* what) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

constexpr std::array<std::pair<Slot, std::string_view>, 3> kSlots{
    {{Slot::Main, "main"}, {Slot::Secondary, "secondary"}, {Slot::Queue, "queue"}}};
constexpr std::array<std::pair<RequestState, std::string_view>, 5> kStates{{{RequestState::Queued, "queued"},
                                                                            {RequestState::Main, "main"},
                                                                            {RequestState::Secondary, "secondary"},
                                                                            {RequestState::Resolved, "resolved"},
                                                                            {RequestState::Missed, "missed"}}};
constexpr std::array<std::pair<Concept, std::string_view>, 4> kConcepts{{{Concept::Any, "any"},
                                                                         {Concept::Waypoint, "waypoint"},
                                                                         {Concept::Trajectory, "trajectory"},
                                                                         {Concept::PathPlan, "pathplan"}}};
constexpr std::array<std::pair<Focus, std::string_view>, 3> kFocus{
    {{Focus::VehicleFocus, "vehicle_focus"}, {Focus::PathEndFocus, "path_end_focus"}, {Focus::Lock, "lock"}}};
constexpr std::array<std::pair<Aoi, std::string_view>, 4> kAois{{{Aoi::RequestPanel, "request_panel"},
                                                                 {Aoi::InfoPanel, "info_panel"},
                                                                 {Aoi::MainPanel, "main_panel"},
                                                                 {Aoi::SecondaryPanel, "secondary_panel"}}};
constexpr std::array<std::pair<EditOp, std::string_view>, 3> kOps{
    {{EditOp::Insert, "insert"}, {EditOp::Move, "move"}, {EditOp::Delete, "delete"}}};

}  // namespace

std::string_view to_string(Slot s) { return name_of(s, kSlots); }
std::string_view to_string(RequestState s) { return name_of(s, kStates); }
std::string_view to_string(Concept c) { return name_of(c, kConcepts); }
std::string_view to_string(Focus f) { return name_of(f, kFocus); }
std::string_view to_string(Aoi a) { return name_of(a, kAois); }
std::string_view to_string(EditOp op) { return name_of(op, kOps); }
Slot slot_from_string(std::string_view s) { return value_of(s, kSlots, "slot"); }
RequestState request_state_from_string(std::string_view s) { return value_of(s, kStates, "request state"); }
Concept concept_from_string(std::string_view s) { return value_of(s, kConcepts, "interaction concept"); }
Focus focus_from_string(std::string_view s) { return value_of(s, kFocus, "focus toggle"); }
Aoi aoi_from_string(std::string_view s) { return value_of(s, kAois, "area of interest"); }
EditOp edit_op_from_string(std::string_view s) { return value_of(s, kOps, "edit op"); }

std::string_view message_tag(const ClientMessage& m) {
  static constexpr std::string_view kTags[] = {"slot_assign",  "waypoint_place",   "waypoint_edit", "stroke_begin",
                                               "stroke_sample", "stroke_end",      "candidate_select",
                                               "focus_toggle", "view_drag",        "pointer_moved", "aoi_change"};
  static_assert(std::size(kTags) == std::variant_size_v<ClientMessage>);
  return kTags[m.index()];
}

bool is_path_input(const ClientMessage& m) {
  return std::holds_alternative<WaypointPlace>(m) || std::holds_alternative<WaypointEditMsg>(m) ||
         std::holds_alternative<StrokeBegin>(m) || std::holds_alternative<StrokeSampleMsg>(m) ||
         std::holds_alternative<StrokeEnd>(m) || std::holds_alternative<CandidateSelect>(m);
}

}  // namespace rasim
