#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <future>
#include <thread>

#include "rasim/errors.hpp"
#include "rasim/protocol.hpp"
#include "rasim/server.hpp"

using namespace rasim;
namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

namespace {

/// Runs `serve` on an ephemeral port in the background.
class Served {
public:
  explicit Served(double budget_s, double speed = 10.0, double wait_s = 5.0) {
    EpisodeConfig c;
    c.time_budget_s = budget_s;
    ServeOptions o;
    o.endpoint = {"127.0.0.1", 0};
    o.speed = speed;
    o.connect_wait_s = wait_s;
    o.on_listening = [this](std::uint16_t p) { port_.set_value(p); };
    result_ = std::async(std::launch::async, [c, o] { return serve(c, o); });
    port = port_.get_future().get();
  }
  RunResult result() { return result_.get(); }
  std::uint16_t port = 0;

private:
  std::promise<std::uint16_t> port_;
  std::future<RunResult> result_;
};

class LineClient {
public:
  explicit LineClient(std::uint16_t port) : socket_(io_) { socket_.connect({asio::ip::make_address("127.0.0.1"), port}); }
  void send(const std::string& line) { asio::write(socket_, asio::buffer(line + "\n")); }
  std::optional<std::string> read_line() {
    boost::system::error_code ec;
    asio::read_until(socket_, buf_, '\n', ec);
    if (ec) return std::nullopt;
    std::istream in(&buf_);
    std::string line;
    std::getline(in, line);
    return line;
  }
  void close() { socket_.close(); }

private:
  asio::io_context io_;
  tcp::socket socket_;
  asio::streambuf buf_;
};

bool has_note(const MetricsLog& log, const std::string& kind) {
  for (const LogRecord& r : log.records()) {
    if (const auto* e = std::get_if<EventRecord>(&r); e && e->kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST(Endpoint, Parse) {
  EXPECT_EQ(parse_endpoint("0.0.0.0:9000").host, "0.0.0.0");
  EXPECT_EQ(parse_endpoint("0.0.0.0:9000").port, 9000);
  EXPECT_EQ(parse_endpoint(":7000").host, "127.0.0.1");
  EXPECT_THROW(parse_endpoint("localhost"), ConfigError);
  EXPECT_THROW(parse_endpoint("host:99999"), ConfigError);
  EXPECT_THROW(parse_endpoint("host:abc"), ConfigError);
}

TEST(Server, LineClientRunsAnEpisode) {
  Served s(5.0);
  LineClient c(s.port);
  auto first = c.read_line();
  ASSERT_TRUE(first);
  EXPECT_TRUE(std::holds_alternative<Hello>(decode_server(*first)));
  c.send(encode(ClientMessage{SlotAssign{0.0, 1, Slot::Main}}));
  c.send("this is not a message");
  std::size_t snapshots = 0;
  bool error = false;
  bool ended = false;
  while (auto line = c.read_line()) {
    const ServerMessage m = decode_server(*line);
    snapshots += std::holds_alternative<Snapshot>(m);
    error = error || std::holds_alternative<ErrorMsg>(m);
    if (std::holds_alternative<EpisodeEnd>(m)) {
      ended = true;
      break;
    }
  }
  EXPECT_TRUE(error);
  EXPECT_TRUE(ended);
  EXPECT_GT(snapshots, 10u);
  const RunResult r = s.result();
  ASSERT_EQ(r.recording.messages.size(), 1u);  // the malformed line is not recorded
  EXPECT_EQ(r.recording.messages[0].msg, (ClientMessage{SlotAssign{0.0, 1, Slot::Main}}));
  EXPECT_TRUE(has_note(r.log, "client_connected"));
  EXPECT_EQ(r.summary.missed, 1);
  // The live recording replays to the same summary.
  EXPECT_EQ(replay(r.recording).summary, r.summary);
}

TEST(Server, WebSocketClient) {
  Served s(5.0);
  asio::io_context io;
  beast::websocket::stream<tcp::socket> ws(io);
  ws.next_layer().connect({asio::ip::make_address("127.0.0.1"), s.port});
  ws.handshake("127.0.0.1", "/");
  ws.text(true);
  beast::flat_buffer buf;
  ws.read(buf);
  EXPECT_TRUE(std::holds_alternative<Hello>(decode_server(beast::buffers_to_string(buf.data()))));
  buf.consume(buf.size());
  ws.write(asio::buffer(encode(ClientMessage{AoiChange{0.1, Aoi::MainPanel, true}})));
  ws.write(asio::buffer(std::string("{\"type\":\"teleport\"}")));
  bool error = false;
  for (;;) {
    ws.read(buf);
    const ServerMessage m = decode_server(beast::buffers_to_string(buf.data()));
    buf.consume(buf.size());
    if (const auto* e = std::get_if<ErrorMsg>(&m)) error = e->message.find("teleport") != std::string::npos;
    if (std::holds_alternative<EpisodeEnd>(m)) break;
  }
  EXPECT_TRUE(error);
  const RunResult r = s.result();
  ASSERT_EQ(r.recording.messages.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<AoiChange>(r.recording.messages[0].msg));
}

TEST(Server, DisconnectIsNotedAndTheEpisodeRunsOn) {
  Served s(4.0);
  {
    LineClient c(s.port);
    ASSERT_TRUE(c.read_line());
    c.close();
  }
  const RunResult r = s.result();
  EXPECT_TRUE(has_note(r.log, "client_disconnected"));
  EXPECT_EQ(r.summary.end_tick, 240);
  bool noted = false;
  for (const RecordedNote& n : r.recording.notes) noted = noted || n.kind == "client_disconnected";
  EXPECT_TRUE(noted);
}

TEST(Server, SecondClientIsTurnedAway) {
  Served s(4.0);
  LineClient first(s.port);
  ASSERT_TRUE(first.read_line());
  LineClient second(s.port);
  auto reply = second.read_line();
  ASSERT_TRUE(reply);
  const ServerMessage m = decode_server(*reply);
  ASSERT_TRUE(std::holds_alternative<ErrorMsg>(m));
  EXPECT_FALSE(second.read_line().has_value());
  while (auto line = first.read_line()) {
    if (std::holds_alternative<EpisodeEnd>(decode_server(*line))) break;
  }
  s.result();
}

TEST(Server, BusyPortIsAStartupError) {
  asio::io_context io;
  tcp::acceptor taken(io, {asio::ip::make_address("127.0.0.1"), 0});
  ServeOptions o;
  o.endpoint = {"127.0.0.1", taken.local_endpoint().port()};
  EXPECT_THROW(serve(EpisodeConfig{}, o), StartupError);
}
