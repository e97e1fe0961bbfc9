#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>

#include "rasim/protocol.hpp"
#include "rasim/session.hpp"

namespace rasim {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7878;
};

/// Parses "HOST:PORT" or ":PORT". Throws ConfigError.
Endpoint parse_endpoint(std::string_view text);

struct ServeOptions {
  Endpoint endpoint;
  double speed = 1.0;           // simulated seconds per wall second; 0 runs unpaced
  double connect_wait_s = 0.0;  // wait this long for a first client before starting the clock
  /// Called from the serving thread once the socket listens, with the bound port (useful with port 0).
  std::function<void(std::uint16_t)> on_listening;
};

/// Serves one episode on one port. A connection whose first bytes are "GET " is upgraded to a WebSocket and
/// exchanges one message per text frame; anything else is a plain line-delimited stream. One client at a time;
/// after a disconnect the episode runs on and a later client may attach. Throws StartupError when the endpoint
/// cannot be bound.
RunResult serve(const EpisodeConfig& config, const ServeOptions& options, std::string wall_clock = {});

}  // namespace rasim
