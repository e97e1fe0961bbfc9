#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rasim/messages.hpp"
#include "rasim/protocol.hpp"
#include "rasim/session.hpp"
#include "rasim/world.hpp"

namespace rasim {

enum class BotKind { Idle, PathPlan, Waypoint, Trajectory };

std::string_view to_string(BotKind k);
BotKind bot_kind_from_string(std::string_view text);  // throws ConfigError
/// Interaction concept a bot operates; Idle works under any.
Concept concept_for(BotKind k);

struct BotParams {
  double dwell_s = 8.0;            // time a request stays Main before the bot rotates
  double reaction_delay_s = 0.0;   // the bot sees snapshots this old
  double retry_s = 0.5;            // wait for an input's effect before acting on the same request again
  double act_remaining_m = 15.0;   // path-plan bot selects once this little path is left
  double waypoint_spacing_m = 86.0;
  double stroke_length_m = 58.0;
  double stroke_gap_m = 3.0;
  double stroke_sample_m = 0.5;
  double view_margin_m = 1.0;      // keep inputs this far inside the view range
  int max_inputs = -1;             // per request; negative means unlimited
  double secondary_share = 0.4;    // share of each second spent on the Secondary panel
  double px_per_m = 4.0;           // map zoom used for pointer travel
  double px_per_cm = 37.8;
};

/// Scripted operator. It sees only decoded server messages and answers with client messages; it never touches
/// episode internals.
class Bot {
public:
  explicit Bot(BotKind kind, BotParams params = {});

  std::vector<ClientMessage> on_message(const ServerMessage& m);

  BotKind kind() const noexcept { return kind_; }

private:
  struct PerRequest {
    std::optional<double> awaiting_since;
    std::optional<Vec2> awaiting_end;
    bool first_move_done = false;
    std::optional<Vec2> last_stroke_end;
    int inputs = 0;
  };

  void act(const Snapshot& seen, double now, std::vector<ClientMessage>& out);
  void schedule(const Snapshot& seen, double now, std::vector<ClientMessage>& out);
  void attend(const Snapshot& seen, double now, std::vector<ClientMessage>& out);
  void path_plan(const RequestView& r, double now, std::vector<ClientMessage>& out);
  void waypoints(const RequestView& r, double now, std::vector<ClientMessage>& out);
  void trajectory(const RequestView& r, double now, std::vector<ClientMessage>& out);
  double route_y(const RequestView& r);
  bool busy(const RequestView& r, double now);
  void mark(const RequestView& r, double now);
  void point_at(Vec2 world_point, const RequestView& r, double now, std::vector<ClientMessage>& out);
  void point_screen(Vec2 screen, double now, std::vector<ClientMessage>& out);

  BotKind kind_;
  BotParams params_;
  std::optional<EpisodeConfig> config_;
  std::map<int, double> route_cache_;
  std::deque<Snapshot> history_;
  std::map<int, PerRequest> state_;
  int main_ = -1;
  int secondary_ = -1;
  double main_since_ = 0.0;
  std::optional<Aoi> area_;
  Vec2 pointer_{640.0, 360.0};
};

/// In-process transport that drives a Bot through the wire encoding in both directions.
class BotTransport : public Transport {
public:
  explicit BotTransport(Bot& bot) : bot_(bot) {}

  void send(const ServerMessage& m) override;
  std::vector<ClientMessage> receive(std::int64_t tick) override;

  std::size_t rejections() const noexcept { return rejections_; }
  std::size_t errors() const noexcept { return errors_; }

private:
  Bot& bot_;
  std::vector<std::string> outbox_;
  std::size_t rejections_ = 0;
  std::size_t errors_ = 0;
};

/// Runs one episode with a bot operator. The config's interaction concept is set to the bot's.
RunResult run_bot(EpisodeConfig config, BotKind kind, const BotParams& params = {}, std::string wall_clock = {});

}  // namespace rasim
