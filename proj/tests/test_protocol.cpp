#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "rasim/bots.hpp"
#include "rasim/errors.hpp"
#include "rasim/protocol.hpp"

using namespace rasim;

namespace {

class RandomMessages {
public:
  explicit RandomMessages(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  bool flag() { return rng_() % 2 == 0; }
  Vec2 point() { return {real(-500.0, 900.0), real(-9.0, 9.0)}; }

  ClientMessage client(std::size_t kind) {
    const double t = real(0.0, 120.0);
    switch (kind) {
      case 0: return SlotAssign{t, static_cast<int>(1 + index(7)), static_cast<Slot>(index(3))};
      case 1: return WaypointPlace{t, point(), flag()};
      case 2: return WaypointEditMsg{t, static_cast<EditOp>(index(3)), index(20), point(), flag()};
      case 3: return StrokeBegin{t, point(), flag()};
      case 4: return StrokeSampleMsg{t, point()};
      case 5: return StrokeEnd{t, point()};
      case 6: return CandidateSelect{t, index(3), flag(), static_cast<std::int64_t>(index(7200))};
      case 7: return FocusToggle{t, static_cast<Focus>(index(3)), flag()};
      case 8: return ViewDrag{t, real(-300, 300), real(-300, 300)};
      case 9: return PointerMoved{t, real(-300, 300), real(-300, 300), real(10.0, 80.0)};
      default: return AoiChange{t, static_cast<Aoi>(index(4)), flag()};
    }
  }

  std::vector<Vec2> polyline() {
    std::vector<Vec2> out(index(6));
    for (Vec2& p : out) p = point();
    return out;
  }

  ServerMessage server(std::size_t kind) {
    switch (kind) {
      case 0: return Hello{kProtocolVersion, "{\"requests\":" + std::to_string(1 + index(7)) + "}"};
      case 1: {
        Snapshot s;
        s.tick = static_cast<std::int64_t>(index(7200));
        s.clock = real(0.0, 120.0);
        for (std::size_t i = 0, n = index(4); i < n; ++i) {
          RequestView r;
          r.id = static_cast<int>(i + 1);
          r.vehicle_id = r.id;
          r.state = static_cast<RequestState>(index(5));
          if (flag()) r.slot = static_cast<Slot>(index(3));
          r.reason = "reason " + std::to_string(i);
          r.side = flag() ? Side::Left : Side::Right;
          r.origin_s = real(-10, 10);
          r.pose = {point(), real(-3.0, 3.0)};
          r.speed = real(0.0, 40.0);
          r.path = polyline();
          r.committed_index = index(5);
          r.candidate_generation = static_cast<std::int64_t>(index(100)) - 1;
          for (std::size_t k = 0, m = index(4); k < m; ++k) r.forward.push_back({static_cast<int>(index(3)), polyline()});
          for (std::size_t k = 0, m = index(4); k < m; ++k) r.reverse.push_back({-1, polyline()});
          r.proximity = {flag(), flag()};
          r.stopped_by_collision = flag();
          r.needs_action = flag();
          r.progress_max = real(0.0, 600.0);
          r.path_inputs = static_cast<int>(index(20));
          for (std::size_t k = 0, m = index(5); k < m; ++k) {
            r.traffic.push_back({static_cast<int>(1000 + k), {point(), real(-0.3, 0.3)}, real(0.0, 40.0)});
          }
          s.requests.push_back(r);
        }
        if (flag()) s.announcements.push_back("Request 2 resolved");
        return s;
      }
      case 2: return ResolvedMsg{static_cast<int>(1 + index(7)), real(0.0, 120.0)};
      case 3: return EpisodeEnd{"{\"resolved\":1}"};
      case 4: return ErrorMsg{"bad \"line\"\n"};
      default: return RejectedMsg{real(0.0, 120.0), "waypoint_place", static_cast<Rejection>(index(3))};
    }
  }

private:
  std::mt19937_64 rng_;
};

RunResult pathplan_run(int n, std::uint64_t seed) {
  EpisodeConfig c;
  c.n_requests = n;
  c.seed = seed;
  return run_bot(c, BotKind::PathPlan);
}

/// Transport that feeds a fixed burst of messages at one tick boundary and keeps everything sent.
class BurstTransport : public Transport {
public:
  BurstTransport(std::int64_t at, std::vector<ClientMessage> burst) : at_(at), burst_(std::move(burst)) {}
  void send(const ServerMessage& m) override { sent.push_back(m); }
  std::vector<ClientMessage> receive(std::int64_t tick) override { return tick == at_ ? burst_ : std::vector<ClientMessage>{}; }
  std::vector<ServerMessage> sent;

private:
  std::int64_t at_;
  std::vector<ClientMessage> burst_;
};

}  // namespace

TEST(Wire, ClientMessagesRoundTrip) {
  RandomMessages gen(1);
  for (std::size_t kind = 0; kind < std::variant_size_v<ClientMessage>; ++kind) {
    for (int i = 0; i < 200; ++i) {
      const ClientMessage m = gen.client(kind);
      ASSERT_EQ(m.index(), kind);
      const std::string line = encode(m);
      EXPECT_EQ(line.find('\n'), std::string::npos);
      EXPECT_EQ(decode_client(line), m) << line;
    }
  }
}

TEST(Wire, ServerMessagesRoundTrip) {
  RandomMessages gen(2);
  for (std::size_t kind = 0; kind < std::variant_size_v<ServerMessage>; ++kind) {
    for (int i = 0; i < 100; ++i) {
      const ServerMessage m = gen.server(kind);
      ASSERT_EQ(m.index(), kind);
      const std::string line = encode(m);
      EXPECT_EQ(line.find('\n'), std::string::npos);
      EXPECT_EQ(decode_server(line), m) << line;
    }
  }
}

TEST(Wire, LiveSnapshotsRoundTrip) {
  EpisodeConfig c;
  c.n_requests = 3;
  Episode ep(c);
  ep.assign_slot(2, Slot::Main);
  for (int k = 0; k < 300; ++k) {
    ep.step();
    if (k % 50 == 0) {
      const ServerMessage m = ep.snapshot();
      EXPECT_EQ(decode_server(encode(m)), m);
    }
  }
}

TEST(Wire, HelloCarriesVersionOne) {
  const std::string line = encode(ServerMessage{Hello{}});
  EXPECT_NE(line.find("\"protocol_version\":\"1\""), std::string::npos) << line;
  EXPECT_EQ(std::get<Hello>(decode_server(line)).protocol_version, "1");
}

TEST(Wire, Errors) {
  const std::string line = encode(ClientMessage{ViewDrag{1.0, 2.0, 3.0}});
  EXPECT_THROW(decode_client(line + " trailing"), ProtocolError);
  EXPECT_THROW(decode_client(line + "{}"), ProtocolError);
  EXPECT_THROW(decode_client("{\"type\":\"view_drag\",\"t\":1.0}"), ProtocolError);
  EXPECT_THROW(decode_client("not json"), ProtocolError);
  EXPECT_THROW(decode_client("[1,2]"), ProtocolError);
  try {
    decode_client("{\"type\":\"teleport\",\"t\":0}");
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("teleport"), std::string::npos);
  }
  EXPECT_THROW(decode_server("{\"type\":\"teleport\"}"), ProtocolError);
}

TEST(Recording, TextRoundTrip) {
  SessionRecording r;
  r.config.n_requests = 2;
  r.config.seed = 99;
  RandomMessages gen(3);
  for (int i = 0; i < 300; ++i) r.messages.push_back({i * 7, gen.client(gen.index(11))});
  r.notes.push_back({40, "disconnect", "peer closed"});
  EXPECT_EQ(parse_recording(recording_to_text(r)), r);
  r.summary = pathplan_run(1, 1).summary;
  EXPECT_EQ(parse_recording(recording_to_text(r)), r);

  const std::string path = (std::filesystem::temp_directory_path() / "rasim_recording.jsonl").string();
  write_recording(path, r);
  EXPECT_EQ(read_recording(path), r);
  std::filesystem::remove(path);
}

TEST(Recording, VersionMismatchNamesBothVersions) {
  SessionRecording r;
  r.protocol_version = "7";
  try {
    replay(r);
    FAIL() << "expected VersionMismatch";
  } catch (const VersionMismatch& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find('7'), std::string::npos) << what;
    EXPECT_NE(what.find('1'), std::string::npos) << what;
  }
  std::string text = recording_to_text(SessionRecording{});
  const auto pos = text.find("\"protocol_version\":\"1\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 22, "\"protocol_version\":\"2\"");
  EXPECT_THROW(parse_recording(text), VersionMismatch);
  EXPECT_THROW(parse_recording("{\"type\":\"recording\""), ParseError);
}

TEST(Replay, ReproducesBotRuns) {
  for (int n : {1, 2}) {
    const RunResult live = pathplan_run(n, 5);
    ASSERT_FALSE(live.recording.messages.empty());
    const RunResult again = replay(parse_recording(recording_to_text(live.recording)));
    EXPECT_EQ(summary_to_json(again.summary), summary_to_json(live.summary));
    EXPECT_EQ(again.log.to_jsonl(false), live.log.to_jsonl(false));
    EXPECT_EQ(again.recording.messages, live.recording.messages);
  }
}

TEST(Replay, RemovingAMessageChangesTheSummary) {
  const RunResult live = pathplan_run(1, 5);
  SessionRecording cut = live.recording;
  const auto it = std::find_if(cut.messages.begin(), cut.messages.end(), [](const RecordedMessage& m) {
    return std::holds_alternative<CandidateSelect>(m.msg);
  });
  ASSERT_NE(it, cut.messages.end());
  cut.messages.erase(it);
  EXPECT_NE(replay(cut).summary, live.summary);
}

TEST(Replay, EmptyRecordingMatchesANoClientRun) {
  EpisodeConfig c;
  c.n_requests = 2;
  NullTransport none;
  const RunResult headless = run_session(c, none);
  SessionRecording empty;
  empty.config = c;
  const RunResult replayed = replay(empty);
  EXPECT_EQ(replayed.summary, headless.summary);
  EXPECT_EQ(replayed.log.to_jsonl(false), headless.log.to_jsonl(false));
  EXPECT_EQ(headless.summary.missed, 2);
}

TEST(Session, MessageStreamShape) {
  EpisodeConfig c;
  c.time_budget_s = 3.0;
  BurstTransport t(0, {});
  run_session(c, t);
  ASSERT_GE(t.sent.size(), 3u);
  EXPECT_TRUE(std::holds_alternative<Hello>(t.sent.front()));
  EXPECT_TRUE(std::holds_alternative<EpisodeEnd>(t.sent.back()));
  std::int64_t last = -1;
  std::size_t snapshots = 0;
  for (const ServerMessage& m : t.sent) {
    if (const auto* s = std::get_if<Snapshot>(&m)) {
      EXPECT_GT(s->tick, last);
      EXPECT_EQ(s->tick % kSnapshotEvery, 0);
      last = s->tick;
      ++snapshots;
    }
  }
  EXPECT_EQ(snapshots, 180u / kSnapshotEvery + 1);
}

TEST(Session, BurstKeepsArrivalOrder) {
  std::vector<ClientMessage> burst;
  for (int i = 0; i < 50; ++i) burst.push_back(PointerMoved{static_cast<double>(i), 1.0, 0.0, 37.8});
  burst.insert(burst.begin() + 25, SlotAssign{25.5, 1, Slot::Main});
  EpisodeConfig c;
  c.time_budget_s = 1.0;
  BurstTransport t(30, burst);
  const RunResult r = run_session(c, t);
  ASSERT_EQ(r.recording.messages.size(), burst.size());
  for (std::size_t i = 0; i < burst.size(); ++i) {
    EXPECT_EQ(r.recording.messages[i].tick, 30);
    EXPECT_EQ(r.recording.messages[i].msg, burst[i]);
  }
  // Log entries carry the session clock, so order shows as the slot event's position among the pointer records.
  std::size_t pointer_before_slot = 0;
  for (const LogRecord& rec : r.log.records()) {
    if (std::holds_alternative<PointerRecord>(rec)) ++pointer_before_slot;
    if (const auto* e = std::get_if<EventRecord>(&rec); e && e->kind == "slot") break;
  }
  EXPECT_EQ(pointer_before_slot, 25u);
  std::size_t pointers = 0;
  for (const LogRecord& rec : r.log.records()) pointers += std::holds_alternative<PointerRecord>(rec);
  EXPECT_EQ(pointers, 50u);
}

TEST(Session, RefusedInputsAreReportedNotFatal) {
  EpisodeConfig c;
  c.time_budget_s = 1.0;
  BurstTransport t(3, {WaypointPlace{0.05, {100.0, 0.0}, false}, SlotAssign{0.05, 9, Slot::Main}});
  const RunResult r = run_session(c, t);
  bool rejected = false;
  bool error = false;
  for (const ServerMessage& m : t.sent) {
    if (const auto* x = std::get_if<RejectedMsg>(&m)) rejected = x->what == "waypoint_place" && x->reason == Rejection::NotMain;
    error = error || std::holds_alternative<ErrorMsg>(m);
  }
  EXPECT_TRUE(rejected);
  EXPECT_TRUE(error);
  EXPECT_EQ(r.summary.missed, 1);
}
