#include "rasim/protocol.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

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

json client_json(const ClientMessage& m) {
  json j = std::visit(
      Overloaded{
          [](const SlotAssign& s) { return json{{"t", s.t}, {"request_id", s.request_id}, {"slot", s.slot}}; },
          [](const WaypointPlace& w) { return json{{"t", w.t}, {"point", w.point}, {"snap", w.snap}}; },
          [](const WaypointEditMsg& w) {
            return json{{"t", w.t}, {"op", w.op}, {"index", w.index}, {"point", w.point}, {"snap", w.snap}};
          },
          [](const StrokeBegin& s) { return json{{"t", s.t}, {"point", s.point}, {"snap", s.snap}}; },
          [](const StrokeSampleMsg& s) { return json{{"t", s.t}, {"point", s.point}}; },
          [](const StrokeEnd& s) { return json{{"t", s.t}, {"point", s.point}}; },
          [](const CandidateSelect& c) {
            return json{{"t", c.t}, {"index", c.index}, {"reverse", c.reverse}, {"generation", c.generation}};
          },
          [](const FocusToggle& f) { return json{{"t", f.t}, {"focus", f.focus}, {"on", f.on}}; },
          [](const ViewDrag& d) { return json{{"t", d.t}, {"dx", d.dx}, {"dy", d.dy}}; },
          [](const PointerMoved& p) {
            return json{{"t", p.t}, {"dx", p.dx}, {"dy", p.dy}, {"px_per_cm", p.px_per_cm}};
          },
          [](const AoiChange& a) { return json{{"t", a.t}, {"area", a.area}, {"enter", a.enter}}; },
      },
      m);
  j["type"] = message_tag(m);
  return j;
}

ClientMessage client_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("message is not a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) throw ProtocolError("message has no type tag");
  const std::string type = j.at("type").get<std::string>();
  try {
    const double t = j.at("t").get<double>();
    if (type == "slot_assign") return SlotAssign{t, j.at("request_id").get<int>(), j.at("slot").get<Slot>()};
    if (type == "waypoint_place") {
      return WaypointPlace{t, j.at("point").get<Vec2>(), j.value("snap", false)};
    }
    if (type == "waypoint_edit") {
      const EditOp op = j.at("op").get<EditOp>();
      const Vec2 p = op == EditOp::Delete ? j.value("point", Vec2{}) : j.at("point").get<Vec2>();
      return WaypointEditMsg{t, op, j.at("index").get<std::size_t>(), p, j.value("snap", false)};
    }
    if (type == "stroke_begin") return StrokeBegin{t, j.at("point").get<Vec2>(), j.value("snap", false)};
    if (type == "stroke_sample") return StrokeSampleMsg{t, j.at("point").get<Vec2>()};
    if (type == "stroke_end") return StrokeEnd{t, j.at("point").get<Vec2>()};
    if (type == "candidate_select") {
      return CandidateSelect{t, j.at("index").get<std::size_t>(), j.value("reverse", false),
                             j.at("generation").get<std::int64_t>()};
    }
    if (type == "focus_toggle") return FocusToggle{t, j.at("focus").get<Focus>(), j.at("on").get<bool>()};
    if (type == "view_drag") return ViewDrag{t, j.at("dx").get<double>(), j.at("dy").get<double>()};
    if (type == "pointer_moved") {
      return PointerMoved{t, j.at("dx").get<double>(), j.at("dy").get<double>(), j.value("px_per_cm", 37.8)};
    }
    if (type == "aoi_change") return AoiChange{t, j.at("area").get<Aoi>(), j.at("enter").get<bool>()};
  } catch (const json::exception& e) {
    throw ProtocolError("bad " + type + " message: " + e.what());
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

json request_json(const RequestView& r) {
  auto candidates = [](const std::vector<CandidateView>& cs) {
    json a = json::array();
    for (const CandidateView& c : cs) a.push_back({{"lane", c.lane}, {"waypoints", c.waypoints}});
    return a;
  };
  json traffic = json::array();
  for (const VehicleView& v : r.traffic) traffic.push_back({{"id", v.id}, {"pose", v.pose}, {"speed", v.speed}});
  return json{{"id", r.id},
              {"vehicle_id", r.vehicle_id},
              {"state", r.state},
              {"slot", r.slot ? json(*r.slot) : json(nullptr)},
              {"reason", r.reason},
              {"side", r.side},
              {"origin_s", r.origin_s},
              {"pose", r.pose},
              {"speed", r.speed},
              {"path", r.path},
              {"committed_index", r.committed_index},
              {"candidate_generation", r.candidate_generation},
              {"forward", candidates(r.forward)},
              {"reverse", candidates(r.reverse)},
              {"proximity", {{"front", r.proximity.front}, {"rear", r.proximity.rear}}},
              {"stopped_by_collision", r.stopped_by_collision},
              {"needs_action", r.needs_action},
              {"progress_max", r.progress_max},
              {"path_inputs", r.path_inputs},
              {"traffic", traffic}};
}

RequestView request_from_json(const json& j) {
  auto candidates = [](const json& a) {
    std::vector<CandidateView> out;
    for (const json& c : a) out.push_back({c.at("lane").get<int>(), c.at("waypoints").get<std::vector<Vec2>>()});
    return out;
  };
  RequestView r;
  r.id = j.at("id").get<int>();
  r.vehicle_id = j.at("vehicle_id").get<int>();
  r.state = j.at("state").get<RequestState>();
  if (!j.at("slot").is_null()) r.slot = j.at("slot").get<Slot>();
  r.reason = j.at("reason").get<std::string>();
  r.side = j.at("side").get<Side>();
  r.origin_s = j.at("origin_s").get<double>();
  r.pose = j.at("pose").get<Pose>();
  r.speed = j.at("speed").get<double>();
  r.path = j.at("path").get<std::vector<Vec2>>();
  r.committed_index = j.at("committed_index").get<std::size_t>();
  r.candidate_generation = j.at("candidate_generation").get<std::int64_t>();
  r.forward = candidates(j.at("forward"));
  r.reverse = candidates(j.at("reverse"));
  r.proximity = {j.at("proximity").at("front").get<bool>(), j.at("proximity").at("rear").get<bool>()};
  r.stopped_by_collision = j.at("stopped_by_collision").get<bool>();
  r.needs_action = j.at("needs_action").get<bool>();
  r.progress_max = j.at("progress_max").get<double>();
  r.path_inputs = j.at("path_inputs").get<int>();
  for (const json& v : j.at("traffic")) {
    r.traffic.push_back({v.at("id").get<int>(), v.at("pose").get<Pose>(), v.at("speed").get<double>()});
  }
  return r;
}

json server_json(const ServerMessage& m) {
  return std::visit(
      Overloaded{
          [](const Hello& h) {
            return json{{"type", "hello"},
                        {"protocol_version", h.protocol_version},
                        {"config", h.config_json.empty() ? json::object() : json::parse(h.config_json)}};
          },
          [](const Snapshot& s) {
            json reqs = json::array();
            for (const RequestView& r : s.requests) reqs.push_back(request_json(r));
            return json{{"type", "snapshot"},
                        {"tick", s.tick},
                        {"clock", s.clock},
                        {"requests", reqs},
                        {"announcements", s.announcements}};
          },
          [](const ResolvedMsg& r) {
            return json{{"type", "resolved"}, {"request_id", r.request_id}, {"clock", r.clock}};
          },
          [](const EpisodeEnd& e) {
            return json{{"type", "episode_end"},
                        {"summary", e.summary_json.empty() ? json::object() : json::parse(e.summary_json)}};
          },
          [](const ErrorMsg& e) { return json{{"type", "error"}, {"message", e.message}}; },
          [](const RejectedMsg& r) {
            return json{{"type", "rejected"}, {"t", r.t}, {"what", r.what}, {"reason", r.reason}};
          },
      },
      m);
}

ServerMessage server_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("message is not a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) throw ProtocolError("message has no type tag");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "hello") return Hello{j.at("protocol_version").get<std::string>(), j.at("config").dump()};
    if (type == "snapshot") {
      Snapshot s;
      s.tick = j.at("tick").get<std::int64_t>();
      s.clock = j.at("clock").get<double>();
      for (const json& r : j.at("requests")) s.requests.push_back(request_from_json(r));
      s.announcements = j.at("announcements").get<std::vector<std::string>>();
      return s;
    }
    if (type == "resolved") return ResolvedMsg{j.at("request_id").get<int>(), j.at("clock").get<double>()};
    if (type == "episode_end") return EpisodeEnd{j.at("summary").dump()};
    if (type == "error") return ErrorMsg{j.at("message").get<std::string>()};
    if (type == "rejected") {
      return RejectedMsg{j.at("t").get<double>(), j.at("what").get<std::string>(), j.at("reason").get<Rejection>()};
    }
  } catch (const json::exception& e) {
    throw ProtocolError("bad " + type + " message: " + e.what());
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

json parse_line(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
}

double message_time(const ClientMessage& m) {
  return std::visit([](const auto& x) { return x.t; }, m);
}

/// Feeds a recording back at the ticks its messages and notes were applied.
class ReplayTransport : public Transport {
public:
  explicit ReplayTransport(const SessionRecording& r) {
    for (const RecordedMessage& m : r.messages) messages_[m.tick].push_back(m.msg);
    for (const RecordedNote& n : r.notes) notes_[n.tick].emplace_back(n.kind, n.detail);
  }
  void send(const ServerMessage&) override {}
  std::vector<ClientMessage> receive(std::int64_t tick) override { return take(messages_, tick); }
  std::vector<std::pair<std::string, std::string>> notes(std::int64_t tick) override { return take(notes_, tick); }

private:
  template <class T>
  static std::vector<T> take(std::map<std::int64_t, std::vector<T>>& m, std::int64_t tick) {
    auto it = m.find(tick);
    if (it == m.end()) return {};
    std::vector<T> out = std::move(it->second);
    m.erase(it);
    return out;
  }

  std::map<std::int64_t, std::vector<ClientMessage>> messages_;
  std::map<std::int64_t, std::vector<std::pair<std::string, std::string>>> notes_;
};

}  // namespace

std::string encode(const ClientMessage& m) { return client_json(m).dump(); }
std::string encode(const ServerMessage& m) { return server_json(m).dump(); }
ClientMessage decode_client(std::string_view line) { return client_from_json(parse_line(line)); }
ServerMessage decode_server(std::string_view line) { return server_from_json(parse_line(line)); }

std::string recording_to_text(const SessionRecording& r) {
  std::string out = json{{"type", "recording"},
                         {"protocol_version", r.protocol_version},
                         {"seed", r.config.seed},
                         {"config", json(r.config)}}
                        .dump();
  out += '\n';
  // Messages and notes interleave by tick; at a shared tick notes come first, as in the live loop.
  std::size_t mi = 0;
  std::size_t ni = 0;
  while (mi < r.messages.size() || ni < r.notes.size()) {
    const bool note_next =
        ni < r.notes.size() && (mi == r.messages.size() || r.notes[ni].tick <= r.messages[mi].tick);
    if (note_next) {
      const RecordedNote& n = r.notes[ni++];
      out += json{{"tick", n.tick}, {"note", n.kind}, {"detail", n.detail}}.dump();
    } else {
      const RecordedMessage& m = r.messages[mi++];
      out += json{{"tick", m.tick}, {"msg", client_json(m.msg)}}.dump();
    }
    out += '\n';
  }
  if (r.summary) {
    out += json{{"type", "summary"}, {"summary", json::parse(summary_to_json(*r.summary))}}.dump();
    out += '\n';
  }
  return out;
}

SessionRecording parse_recording(std::string_view text) {
  SessionRecording rec;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed recording line: ") + e.what());
    }
    try {
      if (!j.is_object()) throw ParseError(line_no, "recording line is not an object");
      if (!have_header) {
        if (j.value("type", std::string()) != "recording") throw ParseError(line_no, "missing recording header");
        rec.protocol_version = j.at("protocol_version").get<std::string>();
        if (rec.protocol_version != kProtocolVersion) throw VersionMismatch(kProtocolVersion, rec.protocol_version);
        rec.config = j.at("config").get<EpisodeConfig>();
        rec.config.seed = j.at("seed").get<std::uint64_t>();
        have_header = true;
      } else if (j.contains("msg")) {
        rec.messages.push_back({j.at("tick").get<std::int64_t>(), client_from_json(j.at("msg"))});
      } else if (j.contains("note")) {
        rec.notes.push_back(
            {j.at("tick").get<std::int64_t>(), j.at("note").get<std::string>(), j.value("detail", std::string())});
      } else if (j.value("type", std::string()) == "summary") {
        rec.summary = summary_from_json(j.at("summary").dump());
      } else {
        throw ParseError(line_no, "unrecognised recording line");
      }
    } catch (const VersionMismatch&) {
      throw;
    } catch (const ProtocolError& e) {
      throw ParseError(line_no, e.what());
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("bad recording line: ") + e.what());
    }
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "empty recording");
  return rec;
}

SessionRecording read_recording(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_recording(ss.str());
}

void write_recording(const std::string& path, const SessionRecording& r) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << recording_to_text(r);
  if (!out) throw std::runtime_error("failed writing " + path);
}

RunResult run_session(const EpisodeConfig& config, Transport& transport, std::string wall_clock) {
  Episode ep(config, std::move(wall_clock));
  SessionRecording rec;
  rec.config = config;
  transport.send(Hello{kProtocolVersion, config_to_json(config)});
  while (!ep.ended()) {
    const std::int64_t tick = ep.tick_count();
    for (auto& [kind, detail] : transport.notes(tick)) {
      ep.note(kind, detail);
      rec.notes.push_back({tick, kind, detail});
    }
    if (tick % kSnapshotEvery == 0) transport.send(ep.snapshot());
    for (ClientMessage& m : transport.receive(tick)) {
      rec.messages.push_back({tick, m});
      try {
        if (auto rejected = ep.apply(m)) {
          transport.send(RejectedMsg{message_time(m), std::string(message_tag(m)), *rejected});
        }
      } catch (const std::logic_error& e) {
        transport.send(ErrorMsg{e.what()});
      }
    }
    for (const ResolvedMsg& r : ep.step()) transport.send(r);
    transport.after_tick(ep);
  }
  RunResult res;
  res.summary = ep.summary();
  rec.summary = res.summary;
  transport.send(ep.snapshot());
  transport.send(EpisodeEnd{summary_to_json(res.summary)});
  res.recording = std::move(rec);
  res.log = ep.log();
  return res;
}

RunResult replay(const SessionRecording& recording) {
  if (recording.protocol_version != kProtocolVersion) {
    throw VersionMismatch(kProtocolVersion, recording.protocol_version);
  }
  ReplayTransport transport(recording);
  return run_session(recording.config, transport);
}

}  // namespace rasim
