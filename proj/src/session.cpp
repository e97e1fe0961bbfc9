#include "rasim/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "json_io.hpp"
#include "rasim/errors.hpp"

namespace rasim {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lane_deviation(const World& world, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const LaneSpec& lane : world.lanes) best = std::min(best, lane.centerline.project(p).distance);
  return best;
}

bool concept_allows(Concept active, Concept needed) { return active == Concept::Any || active == needed; }

}  // namespace

Side EpisodeConfig::side_of(int request_index) const {
  if (sides.empty()) return scenario.works_side;
  return sides.at(static_cast<std::size_t>(request_index));
}

void validate(const EpisodeConfig& c) {
  if (c.n_requests < 1 || c.n_requests > kMaxRequests) {
    throw ConfigError("requests must be between 1 and " + std::to_string(kMaxRequests) + ", got " +
                      std::to_string(c.n_requests));
  }
  if (!(c.time_budget_s > 0.0)) throw ConfigError("time_budget_s must be positive");
  if (!c.sides.empty() && static_cast<int>(c.sides.size()) != c.n_requests) {
    throw ConfigError("sides must list one works side per request");
  }
  if (!(c.linger_s >= 0.0)) throw ConfigError("linger_s must not be negative");
  validate(c.kinematics);
}

std::string config_to_json(const EpisodeConfig& config) { return json(config).dump(); }

EpisodeConfig config_from_json(std::string_view text) {
  EpisodeConfig c;
  try {
    c = json::parse(text).get<EpisodeConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("episode config: ") + e.what());
  }
  validate(c);
  return c;
}

std::string summary_to_json(const EpisodeSummary& s) {
  json reqs = json::array();
  for (const RequestSummary& r : s.requests) {
    json neglect = json::array();
    for (std::size_t i = 0; i < r.neglect.size(); ++i) {
      neglect.push_back({{"start", r.neglect[i].first},
                         {"end", r.neglect[i].second},
                         {"start_tick", r.neglect_ticks[i].first},
                         {"end_tick", r.neglect_ticks[i].second}});
    }
    reqs.push_back({{"id", r.id},
                    {"state", r.state},
                    {"resolved_at", r.resolved_at ? json(*r.resolved_at) : json(nullptr)},
                    {"neglect", neglect},
                    {"path_inputs", r.path_inputs},
                    {"progress_max", r.progress_max},
                    {"progress_trace", r.progress_trace}});
  }
  return json{{"resolved", s.resolved},
              {"missed", s.missed},
              {"end_clock", s.end_clock},
              {"end_tick", s.end_tick},
              {"requests", reqs}}
      .dump();
}

EpisodeSummary summary_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    EpisodeSummary s;
    s.resolved = j.at("resolved").get<int>();
    s.missed = j.at("missed").get<int>();
    s.end_clock = j.at("end_clock").get<double>();
    s.end_tick = j.at("end_tick").get<std::int64_t>();
    for (const json& r : j.at("requests")) {
      RequestSummary rs;
      rs.id = r.at("id").get<int>();
      rs.state = r.at("state").get<RequestState>();
      if (!r.at("resolved_at").is_null()) rs.resolved_at = r.at("resolved_at").get<double>();
      for (const json& n : r.at("neglect")) {
        rs.neglect.emplace_back(n.at("start").get<double>(), n.at("end").get<double>());
        rs.neglect_ticks.emplace_back(n.at("start_tick").get<std::int64_t>(), n.at("end_tick").get<std::int64_t>());
      }
      rs.path_inputs = r.at("path_inputs").get<int>();
      rs.progress_max = r.at("progress_max").get<double>();
      rs.progress_trace = r.at("progress_trace").get<std::vector<double>>();
      s.requests.push_back(std::move(rs));
    }
    return s;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("episode summary: ") + e.what());
  }
}

Episode::Episode(EpisodeConfig config, std::string wall_clock) : config_(std::move(config)) {
  validate(config_);
  budget_ticks_ = std::llround(config_.time_budget_s * kTicksPerSecond);
  log_.append(HeaderRecord{kProtocolVersion, config_.seed, config_to_json(config_), std::move(wall_clock)});

  for (int i = 0; i < config_.n_requests; ++i) {
    Scene sc;
    sc.world = build_scenario(with_side(config_.scenario, config_.side_of(i)));
    const Pose start{sc.world.lane_point(1, 0.0), 0.0};
    const double len = sc.world.initial_path_m;
    sc.vehicle = make_assisted(sc.world, i + 1, start, config_.kinematics.approach_speed,
                               straight_path(start.position, start.heading, len, len), config_.kinematics);
    sc.traffic = make_traffic(splitmix64(config_.seed ^ splitmix64(static_cast<std::uint64_t>(i + 1))),
                              config_.traffic);
    sc.candidates.generation_tick = -1;
    scenes_.push_back(std::move(sc));

    AssistRequest r;
    r.id = i + 1;
    r.vehicle_id = i + 1;
    r.reason = config_.reason;
    r.issued_at = 0.0;
    requests_.push_back(r);
    log_.append(EventRecord{0.0, "issued", r.id, std::nullopt, std::nullopt, r.reason});
  }
}

const AssistRequest& Episode::request(int id) const {
  if (id < 1 || id > static_cast<int>(requests_.size())) {
    throw InvalidTransition("unknown request " + std::to_string(id));
  }
  return requests_[static_cast<std::size_t>(id - 1)];
}

AssistRequest& Episode::mut_request(int id) { return const_cast<AssistRequest&>(request(id)); }

const Scene& Episode::scene(int id) const {
  request(id);
  return scenes_[static_cast<std::size_t>(id - 1)];
}

int Episode::main_request() const {
  for (const AssistRequest& r : requests_) {
    if (r.state == RequestState::Main) return r.id;
  }
  return -1;
}

bool Episode::needs_action(int request_id) const {
  const AssistRequest& r = request(request_id);
  if (is_terminal(r.state)) return false;
  const VehicleState& v = scene(request_id).vehicle;
  if (v.speed != 0.0) return false;
  return v.at_path_end || v.stopped_by_collision || !v.path || v.path->waypoints.size() < 2;
}

void Episode::close_neglect(AssistRequest& r) {
  if (r.neglect.empty() || r.neglect.back().end_tick) return;
  NeglectInterval& n = r.neglect.back();
  if (n.start_tick == tick_) {
    r.neglect.pop_back();
    return;
  }
  n.end_tick = tick_;
  log_.append(EventRecord{clock(), "neglect", r.id, n.start(), n.end(), {}});
}

void Episode::update_neglect(AssistRequest& r, bool active) {
  const bool open = !r.neglect.empty() && !r.neglect.back().end_tick;
  if (active && !open) r.neglect.push_back({tick_, std::nullopt});
  if (!active && open) close_neglect(r);
}

void Episode::assign_slot(int request_id, Slot slot) {
  if (ended_) throw InvalidTransition("episode has ended");
  AssistRequest& r = mut_request(request_id);
  if (is_terminal(r.state)) {
    throw InvalidTransition("request " + std::to_string(request_id) + " is " + std::string(to_string(r.state)));
  }
  if (slot == Slot::Queue) {
    r.slot.reset();
    r.state = RequestState::Queued;
  } else {
    for (AssistRequest& other : requests_) {
      if (other.id == r.id || other.slot != slot) continue;
      other.slot.reset();
      if (!is_terminal(other.state)) other.state = RequestState::Queued;
    }
    r.slot = slot;
    r.state = slot == Slot::Main ? RequestState::Main : RequestState::Secondary;
  }
  if (stroke_ && main_request() != stroke_->request_id) stroke_.reset();
  if (r.state == RequestState::Main) regenerate_candidates(r.id, true);
  for (AssistRequest& q : requests_) {
    if (!is_terminal(q.state)) update_neglect(q, needs_action(q.id) && q.state != RequestState::Main);
  }
  log_.append(EventRecord{clock(), "slot", r.id, std::nullopt, std::nullopt, std::string(to_string(slot))});
}

void Episode::regenerate_candidates(int id, bool fresh) {
  Scene& sc = scenes_[static_cast<std::size_t>(id - 1)];
  if (!concept_allows(config_.interaction, Concept::PathPlan)) return;
  CandidateSet next = generate_candidates(sc.world, sc.vehicle.pose, tick_, config_.candidates);
  // Geometry follows the vehicle every refresh; a shown index stays valid until the options themselves change.
  auto lanes = [](const CandidateSet& c) {
    std::vector<int> out;
    for (const Candidate& k : c.forward) out.push_back(k.lane);
    out.push_back(static_cast<int>(c.reverse.size()));
    return out;
  };
  if (!fresh && sc.candidates.generation_tick >= 0 && lanes(next) == lanes(sc.candidates)) {
    next.generation_tick = sc.candidates.generation_tick;
  }
  sc.candidates = std::move(next);
}

void Episode::install_path(int id, PlannedPath path, std::string_view what) {
  Scene& sc = scenes_[static_cast<std::size_t>(id - 1)];
  set_path(sc.vehicle, std::move(path));
  regenerate_candidates(id, true);
  AssistRequest& r = mut_request(id);
  ++r.path_inputs;
  log_.append(EventRecord{clock(), "input", id, std::nullopt, std::nullopt, std::string(what)});
}

std::optional<Rejection> Episode::apply(const ClientMessage& m) {
  if (ended_) return std::nullopt;
  const double t = clock();
  return std::visit(
      Overloaded{
          [&](const SlotAssign& s) -> std::optional<Rejection> {
            assign_slot(s.request_id, s.slot);
            return std::nullopt;
          },
          [&](const FocusToggle& f) -> std::optional<Rejection> {
            log_.append(EventRecord{t, "focus", std::nullopt, std::nullopt, std::nullopt,
                                    std::string(to_string(f.focus)) + (f.on ? ":on" : ":off")});
            return std::nullopt;
          },
          [&](const ViewDrag& d) -> std::optional<Rejection> {
            json detail{{"dx", d.dx}, {"dy", d.dy}};
            log_.append(EventRecord{t, "view", std::nullopt, std::nullopt, std::nullopt, detail.dump()});
            return std::nullopt;
          },
          [&](const PointerMoved& p) -> std::optional<Rejection> {
            log_.append(PointerRecord{t, p.dx, p.dy, p.px_per_cm});
            return std::nullopt;
          },
          [&](const AoiChange& a) -> std::optional<Rejection> {
            log_.append(AoiRecord{t, a.area, a.enter});
            return std::nullopt;
          },
          [&](const auto&) -> std::optional<Rejection> {
            auto rejected = apply_path_input(m);
            if (rejected) {
              log_.append(EventRecord{t, "rejected", main_request() > 0 ? std::optional<int>(main_request()) : std::nullopt,
                                      std::nullopt, std::nullopt,
                                      std::string(message_tag(m)) + ":" + std::string(to_string(*rejected))});
            }
            return rejected;
          },
      },
      m);
}

std::optional<Rejection> Episode::apply_path_input(const ClientMessage& m) {
  const int id = main_request();
  if (id < 0) return Rejection::NotMain;
  Scene& sc = scenes_[static_cast<std::size_t>(id - 1)];
  const PlannedPath& path = *sc.vehicle.path;
  const Vec2 here = sc.vehicle.pose.position;
  const Concept mode = config_.interaction;
  const std::string tag(message_tag(m));

  auto finish_edit = [&](Edit<PlannedPath> res) -> std::optional<Rejection> {
    if (auto* r = std::get_if<Rejection>(&res)) return *r;
    install_path(id, std::get<PlannedPath>(std::move(res)), tag);
    return std::nullopt;
  };

  if (const auto* p = std::get_if<WaypointPlace>(&m)) {
    if (!concept_allows(mode, Concept::Waypoint)) return Rejection::WrongConcept;
    return finish_edit(waypoint_place(path, p->point, p->snap, sc.world, here));
  }
  if (const auto* e = std::get_if<WaypointEditMsg>(&m)) {
    if (!concept_allows(mode, Concept::Waypoint)) return Rejection::WrongConcept;
    WaypointEdit edit;
    switch (e->op) {
      case EditOp::Insert: edit = InsertBetween{e->index, e->point}; break;
      case EditOp::Move: edit = Move{e->index, e->point}; break;
      case EditOp::Delete: edit = Delete{e->index}; break;
    }
    return finish_edit(waypoint_edit(path, edit, e->snap, sc.world, here));
  }
  if (const auto* b = std::get_if<StrokeBegin>(&m)) {
    if (!concept_allows(mode, Concept::Trajectory)) return Rejection::WrongConcept;
    stroke_ = OpenStroke{id, Stroke{{{b->point, b->t}}, b->snap}};
    return std::nullopt;
  }
  if (std::holds_alternative<StrokeSampleMsg>(m) || std::holds_alternative<StrokeEnd>(m)) {
    if (!concept_allows(mode, Concept::Trajectory)) return Rejection::WrongConcept;
    if (!stroke_ || stroke_->request_id != id) return Rejection::NoStroke;
    const auto* s = std::get_if<StrokeSampleMsg>(&m);
    const StrokeSample sample = s ? StrokeSample{s->point, s->t} : StrokeSample{std::get<StrokeEnd>(m).point,
                                                                                std::get<StrokeEnd>(m).t};
    auto& samples = stroke_->stroke.samples;
    if (sample.t >= samples.back().t) samples.push_back(sample);  // out-of-order samples are dropped
    if (s) return std::nullopt;

    const Stroke stroke = std::move(stroke_->stroke);
    stroke_.reset();
    if (stroke.samples.size() < 2) return Rejection::EmptyTrajectory;
    const auto line = stroke_to_trajectory(stroke, kDefaultTrajectorySpacing, sc.world);
    if (const auto* r = std::get_if<Rejection>(&line)) return *r;
    const Polyline& drawn = std::get<Polyline>(line);
    const MergeClass cls = classify_merge(path, drawn);
    install_path(id, apply_merge(path, drawn, cls), tag + ":" + std::string(to_string(cls.kind)));
    return std::nullopt;
  }
  if (const auto* c = std::get_if<CandidateSelect>(&m)) {
    if (!concept_allows(mode, Concept::PathPlan)) return Rejection::WrongConcept;
    auto res = select_candidate(sc.candidates, c->index, c->reverse, c->generation);
    if (auto* r = std::get_if<Rejection>(&res)) return *r;
    install_path(id, adopt_from_pose(path, here, std::get<PlannedPath>(res), PathSource::PathPlan), tag);
    return std::nullopt;
  }
  return std::nullopt;
}

std::vector<ResolvedMsg> Episode::step() {
  std::vector<ResolvedMsg> notices;
  if (ended_) return notices;
  const double dt = 1.0 / kTicksPerSecond;
  const double t0 = clock();

  for (std::size_t i = 0; i < scenes_.size(); ++i) {
    if (is_terminal(requests_[i].state)) continue;
    Scene& sc = scenes_[i];
    const std::vector<VehicleState> assisted{sc.vehicle};
    VehicleState next = step_vehicle(sc.world, sc.vehicle, sc.traffic.vehicles, config_.kinematics, dt);
    step_traffic(sc.world, sc.traffic, assisted, config_.kinematics, config_.traffic, t0, dt);
    sc.vehicle = std::move(next);
  }
  ++tick_;
  const double t = clock();

  for (std::size_t i = 0; i < scenes_.size(); ++i) {
    AssistRequest& r = requests_[i];
    if (is_terminal(r.state)) continue;
    if (is_resolved(scenes_[i].world, scenes_[i].vehicle)) {
      close_neglect(r);
      r.state = RequestState::Resolved;
      r.resolved_at = t;
      r.linger_until_tick = tick_ + std::llround(config_.linger_s * kTicksPerSecond);
      if (!r.slot) r.linger_until_tick = tick_;
      if (stroke_ && stroke_->request_id == r.id) stroke_.reset();
      log_.append(EventRecord{t, "resolved", r.id, std::nullopt, std::nullopt, {}});
      notices.push_back({r.id, t});
      continue;
    }
    update_neglect(r, needs_action(r.id) && r.state != RequestState::Main);
  }

  for (AssistRequest& r : requests_) {
    if (r.state == RequestState::Resolved && r.slot && r.linger_until_tick && tick_ >= *r.linger_until_tick) {
      log_.append(EventRecord{t, "slot", r.id, std::nullopt, std::nullopt, "released"});
      r.slot.reset();
    }
  }

  if (tick_ % kSnapshotEvery == 0) {
    const int m = main_request();
    if (m > 0) regenerate_candidates(m, false);
  }

  for (std::size_t i = 0; i < scenes_.size(); ++i) {
    AssistRequest& r = requests_[i];
    if (is_terminal(r.state)) continue;
    const VehicleState& v = scenes_[i].vehicle;
    if (tick_ % kSampleEvery == 0) {
      log_.append(SampleRecord{t, tick_, r.id, lane_deviation(scenes_[i].world, v.pose.position),
                               static_cast<std::int64_t>(std::floor(v.progress.max)), v.progress.raw, r.state,
                               v.speed});
    }
    if (tick_ % kTicksPerSecond == 0) r.progress_trace.push_back(v.progress.max);
  }

  if (tick_ >= budget_ticks_) {
    finish();
  } else {
    const bool all_done = std::all_of(requests_.begin(), requests_.end(), [](const AssistRequest& r) {
      return is_terminal(r.state) && !r.slot;
    });
    if (all_done) finish();
  }
  return notices;
}

void Episode::finish() {
  const double t = clock();
  for (AssistRequest& r : requests_) {
    if (is_terminal(r.state)) continue;
    close_neglect(r);
    r.state = RequestState::Missed;
    r.slot.reset();
    log_.append(EventRecord{t, "missed", r.id, std::nullopt, std::nullopt, {}});
  }
  stroke_.reset();
  ended_ = true;
  log_.append(EventRecord{t, "episode_end", std::nullopt, std::nullopt, std::nullopt, {}});
}

void Episode::note(std::string kind, std::string detail) {
  log_.append(EventRecord{clock(), std::move(kind), std::nullopt, std::nullopt, std::nullopt, std::move(detail)});
}

Snapshot Episode::snapshot(bool with_traffic) const {
  Snapshot s;
  s.tick = tick_;
  s.clock = clock();
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    const AssistRequest& r = requests_[i];
    const Scene& sc = scenes_[i];
    const VehicleState& v = sc.vehicle;
    RequestView view;
    view.id = r.id;
    view.vehicle_id = r.vehicle_id;
    view.state = r.state;
    view.slot = r.slot;
    view.reason = r.reason;
    view.side = sc.world.works.side;
    view.origin_s = v.origin_s;
    view.pose = v.pose;
    view.speed = v.speed;
    if (v.path) {
      view.path = v.path->waypoints;
      view.committed_index = v.path->committed_index;
    }
    if (r.state == RequestState::Main) {
      view.candidate_generation = sc.candidates.generation_tick;
      for (const Candidate& c : sc.candidates.forward) view.forward.push_back({c.lane, c.path.waypoints});
      for (const Candidate& c : sc.candidates.reverse) view.reverse.push_back({c.lane, c.path.waypoints});
    }
    view.proximity = v.proximity;
    view.stopped_by_collision = v.stopped_by_collision;
    view.needs_action = needs_action(r.id);
    view.progress_max = v.progress.max;
    view.path_inputs = r.path_inputs;
    if (with_traffic && !is_terminal(r.state)) {
      for (const VehicleState& o : sc.traffic.vehicles) view.traffic.push_back({o.id, o.pose, o.speed});
    }
    if (r.state == RequestState::Resolved && r.slot) {
      s.announcements.push_back("Request " + std::to_string(r.id) + " resolved");
    }
    s.requests.push_back(std::move(view));
  }
  return s;
}

EpisodeSummary Episode::summary() const {
  if (!ended_) throw NotEnded("episode summary requested at clock " + std::to_string(clock()) + " before the end");
  EpisodeSummary s;
  s.end_clock = clock();
  s.end_tick = tick_;
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    const AssistRequest& r = requests_[i];
    if (r.state == RequestState::Resolved) ++s.resolved;
    if (r.state == RequestState::Missed) ++s.missed;
    RequestSummary rs;
    rs.id = r.id;
    rs.state = r.state;
    rs.resolved_at = r.resolved_at;
    for (const NeglectInterval& n : r.neglect) {
      rs.neglect.emplace_back(n.start(), n.end());
      rs.neglect_ticks.emplace_back(n.start_tick, n.end_tick.value_or(n.start_tick));
    }
    rs.path_inputs = r.path_inputs;
    rs.progress_max = scenes_[i].vehicle.progress.max;
    rs.progress_trace = r.progress_trace;
    s.requests.push_back(std::move(rs));
  }
  return s;
}

void CommandQueue::push(ClientMessage m) {
  std::lock_guard lock(mu_);
  items_.push_back(std::move(m));
}

std::vector<ClientMessage> CommandQueue::drain() {
  std::lock_guard lock(mu_);
  std::vector<ClientMessage> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
  items_.clear();
  return out;
}

std::size_t CommandQueue::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

}  // namespace rasim
