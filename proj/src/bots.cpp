#include "rasim/bots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rasim/errors.hpp"

namespace rasim {

namespace {

constexpr Vec2 kScreenCenter{640.0, 360.0};

Vec2 request_panel_slot(int id) { return {80.0, 100.0 + 60.0 * id}; }

double remaining_on_path(const RequestView& r) {
  if (r.path.size() < 2) return 0.0;
  const Polyline line(r.path);
  return std::max(0.0, line.length() - line.project(r.pose.position).s);
}

const RequestView* find_request(const Snapshot& s, int id) {
  for (const RequestView& r : s.requests) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(BotKind k) {
  switch (k) {
    case BotKind::Idle: return "idle";
    case BotKind::PathPlan: return "pathplan";
    case BotKind::Waypoint: return "waypoint";
    case BotKind::Trajectory: return "trajectory";
  }
  return "idle";
}

BotKind bot_kind_from_string(std::string_view text) {
  for (BotKind k : {BotKind::Idle, BotKind::PathPlan, BotKind::Waypoint, BotKind::Trajectory}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown bot '" + std::string(text) + "' (expected idle, pathplan, waypoint or trajectory)");
}

Concept concept_for(BotKind k) {
  switch (k) {
    case BotKind::PathPlan: return Concept::PathPlan;
    case BotKind::Waypoint: return Concept::Waypoint;
    case BotKind::Trajectory: return Concept::Trajectory;
    case BotKind::Idle: break;
  }
  return Concept::Any;
}

Bot::Bot(BotKind kind, BotParams params) : kind_(kind), params_(params) {}

std::vector<ClientMessage> Bot::on_message(const ServerMessage& m) {
  std::vector<ClientMessage> out;
  if (const auto* h = std::get_if<Hello>(&m)) {
    config_ = config_from_json(h->config_json);
    return out;
  }
  const auto* snap = std::get_if<Snapshot>(&m);
  if (snap == nullptr || kind_ == BotKind::Idle) return out;
  history_.push_back(*snap);
  const double now = snap->clock;
  // Keep the newest snapshot that is at least the reaction delay old.
  while (history_.size() > 1 && history_[1].clock <= now - params_.reaction_delay_s + 1e-9) history_.pop_front();
  if (history_.front().clock > now - params_.reaction_delay_s + 1e-9) return out;
  act(history_.front(), now, out);
  return out;
}

void Bot::act(const Snapshot& seen, double now, std::vector<ClientMessage>& out) {
  schedule(seen, now, out);
  attend(seen, now, out);
  const RequestView* r = find_request(seen, main_);
  if (r == nullptr || r->state != RequestState::Main || r->path.size() < 2) return;
  if (busy(*r, now)) return;
  if (params_.max_inputs >= 0 && state_[r->id].inputs >= params_.max_inputs) return;
  switch (kind_) {
    case BotKind::PathPlan: path_plan(*r, now, out); break;
    case BotKind::Waypoint: waypoints(*r, now, out); break;
    case BotKind::Trajectory: trajectory(*r, now, out); break;
    case BotKind::Idle: break;
  }
}

void Bot::schedule(const Snapshot& seen, double now, std::vector<ClientMessage>& out) {
  std::vector<int> active;
  for (const RequestView& r : seen.requests) {
    if (!is_terminal(r.state)) active.push_back(r.id);
  }
  if (active.empty()) return;
  const bool main_live = std::find(active.begin(), active.end(), main_) != active.end();
  const bool rotate = !main_live || (active.size() > 1 && now - main_since_ >= params_.dwell_s);
  if (!rotate) return;

  auto next_after = [&](int id) {
    for (int a : active) {
      if (a > id) return a;
    }
    return active.front();
  };
  const int next_main = main_ < 0 ? active.front() : next_after(main_);
  const int next_secondary = active.size() > 1 ? next_after(next_main) : -1;
  if (next_main == main_ && next_secondary == secondary_) {
    main_since_ = now;
    return;
  }
  point_screen(request_panel_slot(next_main), now, out);
  out.push_back(SlotAssign{now, next_main, Slot::Main});
  if (next_secondary > 0) {
    point_screen(request_panel_slot(next_secondary), now, out);
    out.push_back(SlotAssign{now, next_secondary, Slot::Secondary});
  }
  main_ = next_main;
  secondary_ = next_secondary;
  main_since_ = now;
}

void Bot::attend(const Snapshot& seen, double now, std::vector<ClientMessage>& out) {
  Aoi want = Aoi::MainPanel;
  const bool assigning = now - main_since_ < 0.25 && seen.requests.size() > 1;
  if (assigning) {
    want = Aoi::RequestPanel;
  } else if (secondary_ > 0) {
    const RequestView* s = find_request(seen, secondary_);
    if (s != nullptr && !is_terminal(s->state)) {
      const double phase = now - std::floor(now);
      if (phase >= 1.0 - params_.secondary_share) want = Aoi::SecondaryPanel;
    }
  }
  if (area_ == want) return;
  if (area_) out.push_back(AoiChange{now, *area_, false});
  out.push_back(AoiChange{now, want, true});
  area_ = want;
}

bool Bot::busy(const RequestView& r, double now) {
  PerRequest& st = state_[r.id];
  if (!st.awaiting_since) return false;
  const bool changed = !st.awaiting_end || distance(r.path.back(), *st.awaiting_end) > 1e-6;
  if (changed || now - *st.awaiting_since >= params_.retry_s + params_.reaction_delay_s) {
    st.awaiting_since.reset();
    st.awaiting_end.reset();
    return false;
  }
  return true;
}

void Bot::mark(const RequestView& r, double now) {
  PerRequest& st = state_[r.id];
  st.awaiting_since = now;
  st.awaiting_end = r.path.back();
  ++st.inputs;
}

double Bot::route_y(const RequestView& r) {
  const int key = static_cast<int>(r.side);
  if (auto it = route_cache_.find(key); it != route_cache_.end()) return it->second;
  const EpisodeConfig cfg = config_.value_or(EpisodeConfig{});
  const World world = build_scenario(with_side(cfg.scenario, r.side));
  const double mid = 0.5 * (world.works.start_s + world.works.end_s);
  double best = r.pose.position.y;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int lane : world.passable_lanes_at(mid)) {
    const double y = world.lane_center_offset(lane);
    if (std::abs(y - r.pose.position.y) < best_gap) {
      best_gap = std::abs(y - r.pose.position.y);
      best = y;
    }
  }
  route_cache_[key] = best;
  return best;
}

void Bot::path_plan(const RequestView& r, double now, std::vector<ClientMessage>& out) {
  if (r.forward.empty() || r.candidate_generation < 0) return;
  if (remaining_on_path(r) > params_.act_remaining_m && r.speed > 0.0) return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.forward.size(); ++i) {
    const Vec2 a = r.forward[i].waypoints.back();
    const Vec2 b = r.forward[best].waypoints.back();
    if (a.x > b.x + 1e-6) {
      best = i;
    } else if (std::abs(a.x - b.x) <= 1e-6 &&
               std::abs(a.y - r.pose.position.y) < std::abs(b.y - r.pose.position.y) - 1e-9) {
      best = i;
    }
  }
  const Vec2 end = r.forward[best].waypoints.back();
  if (end.x <= r.path.back().x + 1.0) return;
  point_at(end, r, now, out);
  out.push_back(CandidateSelect{now, best, false, r.candidate_generation});
  mark(r, now);
}

void Bot::waypoints(const RequestView& r, double now, std::vector<ClientMessage>& out) {
  const EpisodeConfig cfg = config_.value_or(EpisodeConfig{});
  const double reach = cfg.scenario.view_range_m - params_.view_margin_m;
  const double y = route_y(r);
  const int count = static_cast<int>(std::ceil(cfg.scenario.resolution_distance_m / params_.waypoint_spacing_m));
  auto target = [&](int k) { return Vec2{r.origin_s + params_.waypoint_spacing_m * k, y}; };
  PerRequest& st = state_[r.id];
  if (!st.first_move_done) {
    st.first_move_done = true;
    const std::size_t last = r.path.size() - 1;
    const Vec2 p1 = target(1);
    if (last > r.committed_index && p1.x > r.pose.position.x + 5.0 && distance(p1, r.pose.position) <= reach) {
      point_at(r.path.back(), r, now, out);
      point_at(p1, r, now, out);
      out.push_back(WaypointEditMsg{now, EditOp::Move, last, p1, false});
      mark(r, now);
      return;
    }
  }
  for (int k = 1; k <= count; ++k) {
    const Vec2 p = target(k);
    if (p.x <= r.path.back().x + 1.0) continue;
    if (distance(p, r.pose.position) > reach) return;
    point_at(p, r, now, out);
    out.push_back(WaypointPlace{now, p, false});
    mark(r, now);
    return;
  }
}

void Bot::trajectory(const RequestView& r, double now, std::vector<ClientMessage>& out) {
  const EpisodeConfig cfg = config_.value_or(EpisodeConfig{});
  const double reach = cfg.scenario.view_range_m - params_.view_margin_m;
  const double len = params_.stroke_length_m;
  PerRequest& st = state_[r.id];
  // A stroke counts once the path ends where it ended; otherwise draw on from wherever the path ends now.
  if (st.last_stroke_end && distance(r.path.back(), *st.last_stroke_end) > 0.5 && st.inputs > 0) {
    st.last_stroke_end = r.path.back();
  }
  if (st.last_stroke_end && st.last_stroke_end->x >= r.origin_s + cfg.scenario.resolution_distance_m) return;

  std::vector<Vec2> samples;
  const int n = static_cast<int>(std::round(len / params_.stroke_sample_m));
  if (!st.last_stroke_end) {
    const Vec2 a = r.pose.position;
    const double y = route_y(r);
    for (int i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / n;
      const double blend = u * u * (3.0 - 2.0 * u);
      samples.push_back({a.x + len * u, a.y + (y - a.y) * blend});
    }
  } else {
    const Vec2 a = *st.last_stroke_end + Vec2{params_.stroke_gap_m, 0.0};
    for (int i = 0; i <= n; ++i) samples.push_back({a.x + len * i / n, a.y});
  }
  if (distance(samples.back(), r.pose.position) > reach) return;
  point_at(samples.front(), r, now, out);
  out.push_back(StrokeBegin{now, samples.front(), false});
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    point_at(samples[i], r, now, out);
    out.push_back(StrokeSampleMsg{now, samples[i]});
  }
  point_at(samples.back(), r, now, out);
  out.push_back(StrokeEnd{now, samples.back()});
  st.last_stroke_end = samples.back();
  mark(r, now);
}

void Bot::point_at(Vec2 world_point, const RequestView& r, double now, std::vector<ClientMessage>& out) {
  const Vec2 rel = world_point - r.pose.position;
  point_screen(kScreenCenter + Vec2{rel.x * params_.px_per_m, -rel.y * params_.px_per_m}, now, out);
}

void Bot::point_screen(Vec2 screen, double now, std::vector<ClientMessage>& out) {
  const Vec2 d = screen - pointer_;
  if (norm(d) < 1e-9) return;
  out.push_back(PointerMoved{now, d.x, d.y, params_.px_per_cm});
  pointer_ = screen;
}

void BotTransport::send(const ServerMessage& m) {
  const ServerMessage seen = decode_server(encode(m));
  if (std::holds_alternative<RejectedMsg>(seen)) ++rejections_;
  if (std::holds_alternative<ErrorMsg>(seen)) ++errors_;
  for (const ClientMessage& c : bot_.on_message(seen)) outbox_.push_back(encode(c));
}

std::vector<ClientMessage> BotTransport::receive(std::int64_t) {
  std::vector<ClientMessage> out;
  out.reserve(outbox_.size());
  for (const std::string& line : outbox_) out.push_back(decode_client(line));
  outbox_.clear();
  return out;
}

RunResult run_bot(EpisodeConfig config, BotKind kind, const BotParams& params, std::string wall_clock) {
  config.interaction = concept_for(kind);
  Bot bot(kind, params);
  BotTransport transport(bot);
  return run_session(config, transport, std::move(wall_clock));
}

}  // namespace rasim
