#include "rasim/server.hpp"

#include <array>
#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>

#include "rasim/errors.hpp"

namespace rasim {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

Endpoint parse_endpoint(std::string_view text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos) throw ConfigError("endpoint must be HOST:PORT, got '" + std::string(text) + "'");
  Endpoint e;
  if (colon > 0) e.host = std::string(text.substr(0, colon));
  const std::string port(text.substr(colon + 1));
  std::size_t used = 0;
  long value = -1;
  try {
    value = std::stol(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || port.empty() || value < 0 || value > 65535) {
    throw ConfigError("endpoint port must be 0-65535, got '" + port + "'");
  }
  e.port = static_cast<std::uint16_t>(value);
  return e;
}

namespace {

constexpr std::chrono::milliseconds kSniffWindow{200};

/// Shared between the io thread (producers) and the tick thread (consumer).
struct Inbox {
  std::mutex mu;
  std::vector<ClientMessage> messages;
  std::vector<std::pair<std::string, std::string>> notes;
  std::atomic<bool> connected{false};
  std::atomic<std::size_t> pending_writes{0};

  void push(ClientMessage m) {
    std::lock_guard lock(mu);
    messages.push_back(std::move(m));
  }
  void note(std::string kind, std::string detail) {
    std::lock_guard lock(mu);
    notes.emplace_back(std::move(kind), std::move(detail));
  }
};

/// One client connection. All members are touched on the io thread only.
class Connection : public std::enable_shared_from_this<Connection> {
public:
  Connection(Inbox& inbox, std::function<void()> on_close) : inbox_(inbox), on_close_(std::move(on_close)) {}
  virtual ~Connection() = default;

  virtual void start(beast::flat_buffer initial) = 0;
  virtual void close() = 0;

  void deliver(std::string line) {
    ++inbox_.pending_writes;
    queue_.push_back(std::move(line));
    if (queue_.size() == 1) write_next();
  }

protected:
  virtual void async_write_one(const std::string& line, std::function<void(beast::error_code)> done) = 0;

  void handle_line(std::string_view line) {
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) return;
    try {
      inbox_.push(decode_client(line));
    } catch (const ProtocolError& e) {
      deliver(encode(ServerMessage{ErrorMsg{e.what()}}));
    }
  }

  void finish(const std::string& why) {
    if (closed_) return;
    closed_ = true;
    inbox_.pending_writes -= queue_.size();
    queue_.clear();
    inbox_.note("client_disconnected", why);
    on_close_();
  }

  bool closed_ = false;

private:
  void write_next() {
    if (queue_.empty() || closed_) return;
    async_write_one(queue_.front(), [self = shared_from_this()](beast::error_code ec) {
      if (self->closed_) return;
      --self->inbox_.pending_writes;
      self->queue_.pop_front();
      if (ec) {
        self->close();
        self->finish(ec.message());
        return;
      }
      self->write_next();
    });
  }

  Inbox& inbox_;
  std::function<void()> on_close_;
  std::deque<std::string> queue_;
};

class LineConnection : public Connection {
public:
  LineConnection(tcp::socket socket, Inbox& inbox, std::function<void()> on_close)
      : Connection(inbox, std::move(on_close)), socket_(std::move(socket)) {}

  void start(beast::flat_buffer initial) override {
    const auto data = initial.data();
    pending_.assign(static_cast<const char*>(data.data()), data.size());
    drain_lines();
    read_more();
  }

  void close() override {
    beast::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

protected:
  void async_write_one(const std::string& line, std::function<void(beast::error_code)> done) override {
    out_ = line + "\n";
    asio::async_write(socket_, asio::buffer(out_),
                      [done = std::move(done)](beast::error_code ec, std::size_t) { done(ec); });
  }

private:
  void drain_lines() {
    std::size_t nl;
    while ((nl = pending_.find('\n')) != std::string::npos) {
      const std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      handle_line(line);
    }
  }

  void read_more() {
    socket_.async_read_some(asio::buffer(chunk_), [self = std::static_pointer_cast<LineConnection>(shared_from_this())](
                                                       beast::error_code ec, std::size_t n) {
      if (self->closed_) return;
      if (ec) {
        self->close();
        self->finish(ec == asio::error::eof ? "closed by client" : ec.message());
        return;
      }
      self->pending_.append(self->chunk_.data(), n);
      self->drain_lines();
      self->read_more();
    });
  }

  tcp::socket socket_;
  std::array<char, 4096> chunk_{};
  std::string pending_;
  std::string out_;
};

class WsConnection : public Connection {
public:
  WsConnection(tcp::socket socket, Inbox& inbox, std::function<void()> on_close)
      : Connection(inbox, std::move(on_close)), ws_(std::move(socket)) {}

  void start(beast::flat_buffer initial) override {
    buffer_ = std::move(initial);
    auto self = std::static_pointer_cast<WsConnection>(shared_from_this());
    http::async_read(ws_.next_layer(), buffer_, request_, [self](beast::error_code ec, std::size_t) {
      if (ec || !websocket::is_upgrade(self->request_)) {
        self->close();
        self->finish(ec ? ec.message() : "plain HTTP request without upgrade");
        return;
      }
      self->ws_.text(true);
      self->ws_.async_accept(self->request_, [self](beast::error_code ec2) {
        if (ec2) {
          self->close();
          self->finish(ec2.message());
          return;
        }
        self->accepted_ = true;
        self->flush_early();
        self->read_more();
      });
    });
  }

  void close() override {
    beast::error_code ignored;
    ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ignored);
    ws_.next_layer().socket().close(ignored);
  }

protected:
  void async_write_one(const std::string& line, std::function<void(beast::error_code)> done) override {
    if (!accepted_) {
      early_.emplace_back(line, std::move(done));
      return;
    }
    out_ = line;
    ws_.async_write(asio::buffer(out_), [done = std::move(done)](beast::error_code ec, std::size_t) { done(ec); });
  }

private:
  // Frames queued before the handshake completed wait for it.
  void flush_early() {
    if (early_.empty()) return;
    auto [line, done] = std::move(early_.front());
    early_.pop_front();
    async_write_one(line, std::move(done));
  }

  void read_more() {
    frame_.clear();
    auto self = std::static_pointer_cast<WsConnection>(shared_from_this());
    ws_.async_read(frame_, [self](beast::error_code ec, std::size_t) {
      if (self->closed_) return;
      if (ec) {
        self->close();
        self->finish(ec == websocket::error::closed ? "closed by client" : ec.message());
        return;
      }
      self->handle_line(beast::buffers_to_string(self->frame_.data()));
      self->read_more();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  beast::flat_buffer frame_;
  http::request<http::string_body> request_;
  bool accepted_ = false;
  std::deque<std::pair<std::string, std::function<void(beast::error_code)>>> early_;
  std::string out_;
};

class ServerTransport : public Transport {
public:
  ServerTransport(const ServeOptions& opts) : opts_(opts), acceptor_(io_) {
    try {
      const tcp::endpoint ep(asio::ip::make_address(opts.endpoint.host), opts.endpoint.port);
      acceptor_.open(ep.protocol());
      acceptor_.set_option(asio::socket_base::reuse_address(true));
      acceptor_.bind(ep);
      acceptor_.listen();
    } catch (const boost::system::system_error& e) {
      throw StartupError("cannot listen on " + opts.endpoint.host + ":" + std::to_string(opts.endpoint.port) + ": " +
                         e.code().message());
    }
    port_ = acceptor_.local_endpoint().port();
    accept_next();
    thread_ = std::thread([this] { io_.run(); });
  }

  ~ServerTransport() override { shutdown(); }

  std::uint16_t port() const noexcept { return port_; }

  void wait_for_client(double seconds) {
    const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
    while (!inbox_.connected && std::chrono::steady_clock::now() < until) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  void start_clock() { started_ = std::chrono::steady_clock::now(); }

  void send(const ServerMessage& m) override {
    const bool hello = std::holds_alternative<Hello>(m);
    asio::post(io_, [this, hello, line = encode(m)]() mutable {
      if (hello) hello_ = line;
      if (conn_) conn_->deliver(std::move(line));
    });
  }

  std::vector<ClientMessage> receive(std::int64_t) override {
    std::lock_guard lock(inbox_.mu);
    return std::exchange(inbox_.messages, {});
  }

  std::vector<std::pair<std::string, std::string>> notes(std::int64_t) override {
    std::lock_guard lock(inbox_.mu);
    return std::exchange(inbox_.notes, {});
  }

  void after_tick(const Episode& ep) override {
    if (opts_.speed <= 0.0) return;
    const auto target = started_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(
                                       ep.clock() / opts_.speed));
    std::this_thread::sleep_until(target);
  }

  /// Lets queued frames reach the client, then closes everything.
  void shutdown() {
    if (!thread_.joinable()) return;
    const auto until = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    // The post below runs after every earlier send was handed to the connection.
    std::atomic<bool> handed{false};
    asio::post(io_, [&handed] { handed = true; });
    while ((!handed || inbox_.pending_writes > 0) && std::chrono::steady_clock::now() < until) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    asio::post(io_, [this] {
      beast::error_code ignored;
      acceptor_.close(ignored);
      if (conn_) conn_->close();
      conn_.reset();
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    io_.stop();
    thread_.join();
  }

private:
  void accept_next() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec == asio::error::operation_aborted || !acceptor_.is_open()) return;
      if (!ec) detect(std::move(socket));
      accept_next();
    });
  }

  // Reads until the first four bytes (or a full short line) tell WebSocket from line mode. A client that stays
  // silent is waiting for Hello, so it gets line mode once the sniff window passes.
  void detect(tcp::socket socket) {
    auto sock = std::make_shared<tcp::socket>(std::move(socket));
    auto buf = std::make_shared<beast::flat_buffer>();
    auto timer = std::make_shared<asio::steady_timer>(io_, kSniffWindow);
    auto decided = std::make_shared<bool>(false);
    timer->async_wait([this, sock, buf, decided](beast::error_code ec) {
      if (ec || *decided) return;
      *decided = true;
      beast::error_code ignored;
      sock->cancel(ignored);
      attach(std::move(*sock), std::move(*buf), false);
    });
    detect_step(sock, buf, timer, decided);
  }

  void detect_step(std::shared_ptr<tcp::socket> sock, std::shared_ptr<beast::flat_buffer> buf,
                   std::shared_ptr<asio::steady_timer> timer, std::shared_ptr<bool> decided) {
    auto mutable_buf = buf->prepare(512);
    sock->async_read_some(mutable_buf, [this, sock, buf, timer, decided](beast::error_code ec, std::size_t n) {
      if (*decided) return;
      if (ec) {
        *decided = true;
        timer->cancel();
        return;
      }
      buf->commit(n);
      const std::string head = beast::buffers_to_string(buf->data());
      if (head.size() < 4 && head.find('\n') == std::string::npos) {
        detect_step(sock, buf, timer, decided);
        return;
      }
      *decided = true;
      timer->cancel();
      attach(std::move(*sock), std::move(*buf), head.rfind("GET ", 0) == 0);
    });
  }

  void attach(tcp::socket socket, beast::flat_buffer initial, bool websocket) {
    if (conn_) {
      const std::string busy = encode(ServerMessage{ErrorMsg{"session already has a client"}}) + "\n";
      beast::error_code ignored;
      asio::write(socket, asio::buffer(busy), ignored);
      socket.close(ignored);
      return;
    }
    auto on_close = [this] {
      conn_.reset();
      inbox_.connected = false;
    };
    if (websocket) {
      conn_ = std::make_shared<WsConnection>(std::move(socket), inbox_, on_close);
    } else {
      conn_ = std::make_shared<LineConnection>(std::move(socket), inbox_, on_close);
    }
    inbox_.note("client_connected", websocket ? "websocket" : "line");
    inbox_.connected = true;
    auto conn = conn_;
    conn->start(std::move(initial));
    if (!hello_.empty() && conn_ == conn) conn->deliver(hello_);
  }

  ServeOptions opts_;
  asio::io_context io_;
  tcp::acceptor acceptor_;
  std::uint16_t port_ = 0;
  std::thread thread_;
  std::shared_ptr<Connection> conn_;
  Inbox inbox_;
  std::string hello_;  // io thread only
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
};

}  // namespace

RunResult serve(const EpisodeConfig& config, const ServeOptions& options, std::string wall_clock) {
  validate(config);
  ServerTransport transport(options);
  if (options.on_listening) options.on_listening(transport.port());
  if (options.connect_wait_s > 0.0) transport.wait_for_client(options.connect_wait_s);
  transport.start_clock();
  RunResult result = run_session(config, transport, std::move(wall_clock));
  transport.shutdown();
  return result;
}

}  // namespace rasim
