#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "jbw/net/server_core.hpp"

namespace jbw::net {

/// Hosts a ServerCore on two endpoints: newline-delimited JSON over TCP and
/// the same JSON as text frames over WebSocket. Port 0 picks a free port.
class Server {
 public:
  Server(ServerCore& core, std::uint16_t tcp_port, std::uint16_t ws_port, std::string address = "127.0.0.1");
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds both endpoints; throws std::system_error on failure.
  void start();
  std::uint16_t tcp_port() const;
  std::uint16_t ws_port() const;

  /// Serves until stop() is called (from any thread).
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace jbw::net
