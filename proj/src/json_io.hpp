// JSON mappings shared by the session, metrics and protocol translation units.
#pragma once

#include <json.hpp>

#include "rasim/dynamics.hpp"
#include "rasim/errors.hpp"
#include "rasim/messages.hpp"
#include "rasim/pathedit.hpp"
#include "rasim/session.hpp"
#include "rasim/world.hpp"

namespace rasim {

using nlohmann::json;

inline void to_json(json& j, const Vec2& v) { j = json::array({v.x, v.y}); }
inline void from_json(const json& j, Vec2& v) {
  if (!j.is_array() || j.size() != 2) throw json::type_error::create(302, "point must be [x, y]", &j);
  v = {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline void to_json(json& j, const Pose& p) { j = json{{"x", p.position.x}, {"y", p.position.y}, {"heading", p.heading}}; }
inline void from_json(const json& j, Pose& p) {
  p = {{j.at("x").get<double>(), j.at("y").get<double>()}, j.at("heading").get<double>()};
}

/// Enum <-> string through the module's to_string / *_from_string pair; unknown strings become type errors.
template <class E, class Parse>
E enum_from(const json& j, Parse parse) {
  try {
    return parse(j.get<std::string>());
  } catch (const json::exception&) {
    throw;
  } catch (const std::exception& e) {
    throw json::type_error::create(302, e.what(), &j);
  }
}

inline void to_json(json& j, Side s) { j = std::string(to_string(s)); }
inline void from_json(const json& j, Side& s) { s = enum_from<Side>(j, side_from_string); }
inline void to_json(json& j, Slot s) { j = std::string(to_string(s)); }
inline void from_json(const json& j, Slot& s) { s = enum_from<Slot>(j, slot_from_string); }
inline void to_json(json& j, RequestState s) { j = std::string(to_string(s)); }
inline void from_json(const json& j, RequestState& s) { s = enum_from<RequestState>(j, request_state_from_string); }
inline void to_json(json& j, Concept c) { j = std::string(to_string(c)); }
inline void from_json(const json& j, Concept& c) { c = enum_from<Concept>(j, concept_from_string); }
inline void to_json(json& j, Focus f) { j = std::string(to_string(f)); }
inline void from_json(const json& j, Focus& f) { f = enum_from<Focus>(j, focus_from_string); }
inline void to_json(json& j, Aoi a) { j = std::string(to_string(a)); }
inline void from_json(const json& j, Aoi& a) { a = enum_from<Aoi>(j, aoi_from_string); }
inline void to_json(json& j, EditOp op) { j = std::string(to_string(op)); }
inline void from_json(const json& j, EditOp& op) { op = enum_from<EditOp>(j, edit_op_from_string); }
inline void to_json(json& j, Rejection r) { j = std::string(to_string(r)); }
inline void from_json(const json& j, Rejection& r) { r = enum_from<Rejection>(j, rejection_from_string); }

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScenarioConfig, lane_count, lane_width_m, works_side, works_start_m,
                                                works_end_m, blocked_lanes, view_range_m, resolution_distance_m,
                                                initial_path_m, taper_m, cone_radius_m, cone_spacing_m, road_start_m,
                                                road_end_m)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(KinematicsConfig, approach_speed, works_speed, max_accel, max_decel,
                                                planning_decel, proximity_radius, stop_standoff, lookahead_min,
                                                lookahead_gain, reverse_speed, min_turn_radius, lateral_accel,
                                                min_curve_speed, half_length, half_width, obstacle_inflation,
                                                scan_step)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrafficConfig, enabled, mean_interarrival_s, spawn_x,
                                                spawn_clearance_m, despawn_margin_m, headway_s, standstill_gap_m,
                                                min_gap_m, emergency_decel, lane_change_s, mandatory_lookahead_m,
                                                courtesy_gap_m, slow_leader_ratio, slow_leader_range_m,
                                                desired_spread)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CandidateConfig, horizon_m, standoff_m, blend_m, sample_spacing_m,
                                                clip_step_m, min_length_m, vehicle_half_length, vehicle_half_width,
                                                reverse_straight_m, reverse_radius_m, reverse_sweep_deg)

inline void to_json(json& j, const EpisodeConfig& c) {
  j = json{{"requests", c.n_requests},   {"time_budget_s", c.time_budget_s}, {"sides", c.sides},
           {"seed", c.seed},             {"interaction", c.interaction},     {"linger_s", c.linger_s},
           {"reason", c.reason},         {"scenario", c.scenario},           {"kinematics", c.kinematics},
           {"traffic", c.traffic},       {"candidates", c.candidates}};
}
inline void from_json(const json& j, EpisodeConfig& c) {
  const EpisodeConfig d;
  c.n_requests = j.value("requests", d.n_requests);
  c.time_budget_s = j.value("time_budget_s", d.time_budget_s);
  c.sides = j.value("sides", d.sides);
  c.seed = j.value("seed", d.seed);
  c.interaction = j.value("interaction", d.interaction);
  c.linger_s = j.value("linger_s", d.linger_s);
  c.reason = j.value("reason", d.reason);
  c.scenario = j.value("scenario", d.scenario);
  c.kinematics = j.value("kinematics", d.kinematics);
  c.traffic = j.value("traffic", d.traffic);
  c.candidates = j.value("candidates", d.candidates);
}

}  // namespace rasim
