#include "jbw/net/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <unordered_map>

namespace jbw::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxFrame = 1 << 20;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(ServerCore& core, std::unordered_map<SessionId, std::weak_ptr<Connection>>& registry)
      : core_(core), registry_(registry), session_(core.open_session()) {}
  virtual ~Connection() = default;

  SessionId session() const { return session_; }
  virtual void start() = 0;

  /// Pulls queued frames from the core and writes them.
  void flush() {
    for (std::string& f : core_.drain(session_)) pending_.push_back(std::move(f));
    if (!writing_) write_next();
  }

 protected:
  void on_frame(std::string_view frame) {
    if (!core_.handle(session_, frame)) closing_ = true;
    flush();
  }

  void write_next() {
    if (pending_.empty()) {
      writing_ = false;
      if (closing_) shutdown();
      return;
    }
    writing_ = true;
    write(pending_.front());
  }

  void on_written(beast::error_code ec) {
    if (ec) return finish();
    pending_.pop_front();
    write_next();
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    registry_.erase(session_);
    core_.close_session(session_);
    shutdown();
  }

  virtual void write(const std::string& frame) = 0;
  virtual void shutdown() = 0;

  ServerCore& core_;
  std::unordered_map<SessionId, std::weak_ptr<Connection>>& registry_;
  SessionId session_;
  std::deque<std::string> pending_;
  bool writing_{false};
  bool closing_{false};
  bool finished_{false};
};

class TcpConnection final : public Connection {
 public:
  TcpConnection(tcp::socket socket, ServerCore& core, std::unordered_map<SessionId, std::weak_ptr<Connection>>& registry)
      : Connection(core, registry), socket_(std::move(socket)), buffer_(kMaxFrame) {}

  void start() override { read(); }

 private:
  void read() {
    asio::async_read_until(socket_, buffer_, '\n', [self = shared_from_this(), this](beast::error_code ec, std::size_t n) {
      if (ec) return finish();
      std::string line(asio::buffers_begin(buffer_.data()), asio::buffers_begin(buffer_.data()) + static_cast<std::ptrdiff_t>(n));
      buffer_.consume(n);
      while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
      if (!line.empty()) on_frame(line);
      if (!closing_) read();
    });
  }

  void write(const std::string& frame) override {
    out_ = frame + "\n";
    asio::async_write(socket_, asio::buffer(out_),
                      [self = shared_from_this(), this](beast::error_code ec, std::size_t) { on_written(ec); });
  }

  void shutdown() override {
    beast::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

  tcp::socket socket_;
  asio::streambuf buffer_;
  std::string out_;
};

class WsConnection final : public Connection {
 public:
  WsConnection(tcp::socket socket, ServerCore& core, std::unordered_map<SessionId, std::weak_ptr<Connection>>& registry)
      : Connection(core, registry), ws_(std::move(socket)) {}

  void start() override {
    ws_.read_message_max(kMaxFrame);
    ws_.async_accept([self = shared_from_this(), this](beast::error_code ec) {
      if (ec) return finish();
      ws_.text(true);
      read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
      if (ec) return finish();
      const std::string frame = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      on_frame(frame);
      if (!closing_) read();
    });
  }

  void write(const std::string& frame) override {
    out_ = frame;
    ws_.async_write(asio::buffer(out_), [self = shared_from_this(), this](beast::error_code ec, std::size_t) { on_written(ec); });
  }

  void shutdown() override {
    if (ws_.is_open() && !finished_) {
      ws_.async_close(websocket::close_code::normal, [self = shared_from_this(), this](beast::error_code) { finish(); });
      return;
    }
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).close(ignored);
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  std::string out_;
};

}  // namespace

struct Server::Impl {
  Impl(ServerCore& c, std::uint16_t tp, std::uint16_t wp, std::string addr)
      : core(c), tcp_port(tp), ws_port(wp), address(std::move(addr)), tcp_acceptor(io), ws_acceptor(io), timer(io) {}

  void open(tcp::acceptor& acceptor, std::uint16_t port) {
    const tcp::endpoint endpoint(asio::ip::make_address(address), port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen();
  }

  template <typename ConnectionType>
  void accept(tcp::acceptor& acceptor) {
    acceptor.async_accept([this, &acceptor](beast::error_code ec, tcp::socket socket) {
      if (!acceptor.is_open()) return;
      if (!ec) {
        auto connection = std::make_shared<ConnectionType>(std::move(socket), core, registry);
        registry[connection->session()] = connection;
        connection->start();
      }
      accept<ConnectionType>(acceptor);
    });
  }

  void schedule_tick() {
    timer.expires_after(std::chrono::milliseconds(250));
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      core.tick();
      schedule_tick();
    });
  }

  ServerCore& core;
  std::uint16_t tcp_port;
  std::uint16_t ws_port;
  std::string address;
  asio::io_context io;
  tcp::acceptor tcp_acceptor;
  tcp::acceptor ws_acceptor;
  asio::steady_timer timer;
  std::unordered_map<SessionId, std::weak_ptr<Connection>> registry;
};

Server::Server(ServerCore& core, std::uint16_t tcp_port, std::uint16_t ws_port, std::string address)
    : impl_(std::make_unique<Impl>(core, tcp_port, ws_port, std::move(address))) {}

Server::~Server() {
  stop();
  impl_->core.set_notifier({});
}

void Server::start() {
  Impl& m = *impl_;
  m.open(m.tcp_acceptor, m.tcp_port);
  m.open(m.ws_acceptor, m.ws_port);
  m.core.set_notifier([&m](SessionId session) {
    asio::post(m.io, [&m, session] {
      const auto it = m.registry.find(session);
      if (it == m.registry.end()) return;
      if (auto connection = it->second.lock()) connection->flush();
    });
  });
  m.accept<TcpConnection>(m.tcp_acceptor);
  m.accept<WsConnection>(m.ws_acceptor);
  m.schedule_tick();
}

std::uint16_t Server::tcp_port() const { return impl_->tcp_acceptor.local_endpoint().port(); }
std::uint16_t Server::ws_port() const { return impl_->ws_acceptor.local_endpoint().port(); }

void Server::run() { impl_->io.run(); }

void Server::stop() {
  asio::post(impl_->io, [&m = *impl_] {
    beast::error_code ignored;
    m.tcp_acceptor.close(ignored);
    m.ws_acceptor.close(ignored);
    m.timer.cancel();
    m.io.stop();
  });
}

}  // namespace jbw::net
