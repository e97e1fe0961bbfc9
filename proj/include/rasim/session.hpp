#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rasim/dynamics.hpp"
#include "rasim/messages.hpp"
#include "rasim/metrics.hpp"
#include "rasim/pathedit.hpp"
#include "rasim/world.hpp"

namespace rasim {

inline constexpr int kTicksPerSecond = 60;
inline constexpr int kSnapshotEvery = 3;  // 20 Hz
inline constexpr int kSampleEvery = 6;    // 10 Hz
inline constexpr int kMaxRequests = 7;

struct EpisodeConfig {
  int n_requests = 1;
  double time_budget_s = 120.0;
  std::vector<Side> sides;  // per request; empty means scenario.works_side for all
  std::uint64_t seed = 1;
  Concept interaction = Concept::Any;
  double linger_s = 2.0;
  std::string reason = "Road works ahead - outside ODD";
  ScenarioConfig scenario;
  KinematicsConfig kinematics;
  TrafficConfig traffic;
  CandidateConfig candidates;

  Side side_of(int request_index) const;
  bool operator==(const EpisodeConfig&) const = default;
};

/// Throws ConfigError for out-of-range values.
void validate(const EpisodeConfig& config);
std::string config_to_json(const EpisodeConfig& config);
EpisodeConfig config_from_json(std::string_view text);

/// Neglect interval in ticks; `end_tick` is empty while open. The interval covers ticks [start, end).
struct NeglectInterval {
  std::int64_t start_tick = 0;
  std::optional<std::int64_t> end_tick;
  double start() const { return static_cast<double>(start_tick) / kTicksPerSecond; }
  double end() const { return static_cast<double>(end_tick.value_or(start_tick)) / kTicksPerSecond; }
  bool operator==(const NeglectInterval&) const = default;
};

struct AssistRequest {
  int id = 0;
  int vehicle_id = 0;
  std::string reason;
  double issued_at = 0.0;
  RequestState state = RequestState::Queued;
  std::optional<Slot> slot;  // a resolved request keeps its slot while lingering
  std::vector<NeglectInterval> neglect;
  std::optional<double> resolved_at;
  std::optional<std::int64_t> linger_until_tick;
  int path_inputs = 0;
  std::vector<double> progress_trace;  // progress_max once per second
};

/// Everything one request's vehicle lives in: its own road, traffic and path-editing state.
struct Scene {
  World world;
  VehicleState vehicle;
  TrafficState traffic;
  CandidateSet candidates;
};

struct RequestSummary {
  int id = 0;
  RequestState state = RequestState::Queued;
  std::optional<double> resolved_at;
  std::vector<std::pair<double, double>> neglect;
  std::vector<std::pair<std::int64_t, std::int64_t>> neglect_ticks;
  int path_inputs = 0;
  double progress_max = 0.0;
  std::vector<double> progress_trace;
  bool operator==(const RequestSummary&) const = default;
};

struct EpisodeSummary {
  int resolved = 0;
  int missed = 0;
  double end_clock = 0.0;
  std::int64_t end_tick = 0;
  std::vector<RequestSummary> requests;
  bool operator==(const EpisodeSummary&) const = default;
};

std::string summary_to_json(const EpisodeSummary& s);
EpisodeSummary summary_from_json(std::string_view text);

class Episode {
public:
  /// All requests are issued at clock 0 and start Queued. Throws ConfigError.
  explicit Episode(EpisodeConfig config, std::string wall_clock = {});

  const EpisodeConfig& config() const noexcept { return config_; }
  std::int64_t tick_count() const noexcept { return tick_; }
  double clock() const noexcept { return static_cast<double>(tick_) / kTicksPerSecond; }
  bool ended() const noexcept { return ended_; }
  std::int64_t budget_ticks() const noexcept { return budget_ticks_; }

  const std::vector<AssistRequest>& requests() const noexcept { return requests_; }
  const AssistRequest& request(int id) const;
  const Scene& scene(int id) const;

  /// Moves a request into a slot. An occupant of the target slot goes back to the queue. Throws
  /// InvalidTransition for terminal or unknown requests.
  void assign_slot(int request_id, Slot slot);

  /// Stopped at the end of its path, stopped in front of an obstacle, or without a path.
  bool needs_action(int request_id) const;

  /// Applies one client message at the current tick boundary. Path inputs go to the Main request.
  /// Returns the reason when the input is refused; the path is then untouched.
  std::optional<Rejection> apply(const ClientMessage& m);

  /// Advances one fixed tick. Returns resolution notices raised during the tick.
  std::vector<ResolvedMsg> step();

  Snapshot snapshot(bool with_traffic = true) const;

  /// Throws NotEnded before the episode ended.
  EpisodeSummary summary() const;

  const MetricsLog& log() const noexcept { return log_; }

  /// Records a free-form event (for example a client disconnect) in the metrics log.
  void note(std::string kind, std::string detail);

private:
  AssistRequest& mut_request(int id);
  int main_request() const;  // -1 when none
  std::optional<Rejection> apply_path_input(const ClientMessage& m);
  void install_path(int id, PlannedPath path, std::string_view what);
  /// `fresh` starts a new generation even when the options are unchanged.
  void regenerate_candidates(int id, bool fresh);
  void update_neglect(AssistRequest& r, bool active);
  void close_neglect(AssistRequest& r);
  void finish();

  EpisodeConfig config_;
  std::int64_t budget_ticks_ = 0;
  std::int64_t tick_ = 0;
  bool ended_ = false;
  std::vector<AssistRequest> requests_;
  std::vector<Scene> scenes_;
  MetricsLog log_;

  struct OpenStroke {
    int request_id = -1;
    Stroke stroke;
  };
  std::optional<OpenStroke> stroke_;
};

/// Ordered hand-off from a connection thread to the tick thread. One producer, one consumer.
class CommandQueue {
public:
  void push(ClientMessage m);
  std::vector<ClientMessage> drain();
  std::size_t size() const;

private:
  mutable std::mutex mu_;
  std::deque<ClientMessage> items_;
};

}  // namespace rasim
