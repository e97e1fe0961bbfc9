#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rasim/messages.hpp"
#include "rasim/metrics.hpp"
#include "rasim/session.hpp"

namespace rasim {

/// One JSON object per line, tagged by "type". decode(encode(m)) == m for every message.
std::string encode(const ClientMessage& m);
std::string encode(const ServerMessage& m);
/// Throws ProtocolError naming unknown tags, missing fields or trailing garbage.
ClientMessage decode_client(std::string_view line);
ServerMessage decode_server(std::string_view line);

struct RecordedMessage {
  std::int64_t tick = 0;
  ClientMessage msg;
  bool operator==(const RecordedMessage&) const = default;
};

struct RecordedNote {
  std::int64_t tick = 0;
  std::string kind;
  std::string detail;
  bool operator==(const RecordedNote&) const = default;
};

/// Everything needed to reproduce a session: configuration plus the client messages at the ticks they were
/// applied. The live run's summary trails the file so replays can be checked against it.
struct SessionRecording {
  std::string protocol_version = kProtocolVersion;
  EpisodeConfig config;
  std::vector<RecordedMessage> messages;
  std::vector<RecordedNote> notes;
  std::optional<EpisodeSummary> summary;
  bool operator==(const SessionRecording&) const = default;
};

std::string recording_to_text(const SessionRecording& r);
/// Throws ParseError for malformed lines and VersionMismatch for another protocol version.
SessionRecording parse_recording(std::string_view text);
SessionRecording read_recording(const std::string& path);
void write_recording(const std::string& path, const SessionRecording& r);

/// Where a session's messages come from and go to. Called only from the tick thread.
class Transport {
public:
  virtual ~Transport() = default;
  virtual void send(const ServerMessage& m) = 0;
  /// Client messages that arrived for the boundary before tick `tick`, in arrival order.
  virtual std::vector<ClientMessage> receive(std::int64_t tick) = 0;
  /// Connection notes (connects, disconnects) to record at this boundary, as (kind, detail).
  virtual std::vector<std::pair<std::string, std::string>> notes(std::int64_t /*tick*/) { return {}; }
  /// Called after every tick; live transports pace wall time here.
  virtual void after_tick(const Episode& /*episode*/) {}
};

/// Transport with no client: the episode runs on its initial paths.
class NullTransport : public Transport {
public:
  void send(const ServerMessage&) override {}
  std::vector<ClientMessage> receive(std::int64_t) override { return {}; }
};

struct RunResult {
  EpisodeSummary summary;
  SessionRecording recording;
  MetricsLog log;
};

/// Runs one episode to its end: Hello, a Snapshot every third tick, client messages applied at tick boundaries,
/// Resolved notices and a final EpisodeEnd.
RunResult run_session(const EpisodeConfig& config, Transport& transport, std::string wall_clock = {});

/// Re-runs a recording. Throws VersionMismatch when the recording speaks another protocol version.
RunResult replay(const SessionRecording& recording);

}  // namespace rasim
