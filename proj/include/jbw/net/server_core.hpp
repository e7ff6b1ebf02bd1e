#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jbw/net/protocol.hpp"
#include "jbw/schedule.hpp"
#include "jbw/simulator.hpp"

namespace jbw::net {

using SessionId = std::uint64_t;
using Clock = std::chrono::steady_clock;

struct ServerOptions {
  std::size_t queue_capacity{1024};
  std::chrono::milliseconds grace{30000};
  std::filesystem::path save_dir{"."};
  std::optional<RewardSchedule> schedule;
  std::size_t max_map_patches{64};
};

struct PatchRect {
  Position min;
  Position max;
};

/// Transport-independent server state. Every mutation of the simulator goes
/// through handle()/tick() under one lock, in arrival order. Outbound frames
/// are queued per session; transports pull them with drain().
class ServerCore {
 public:
  explicit ServerCore(Simulator simulator, ServerOptions options = {});

  SessionId open_session();
  /// Processes one inbound frame. Returns false when the session must be
  /// closed once its queue is flushed (malformed frame).
  bool handle(SessionId session, std::string_view frame);
  /// The transport is gone. Owned agents keep blocking the turn for the grace
  /// period, then are removed by tick().
  void close_session(SessionId session, Clock::time_point now = Clock::now());
  void tick(Clock::time_point now = Clock::now());

  std::vector<std::string> drain(SessionId session);
  std::size_t dropped(SessionId session) const;
  std::size_t session_count() const;

  /// Called (outside the lock) whenever a session has new outbound frames.
  void set_notifier(std::function<void(SessionId)> notifier);

  std::int64_t time() const;
  std::uint64_t digest() const;
  std::vector<std::uint8_t> save() const;

 private:
  struct Outbound {
    std::string frame;
    bool droppable;
  };
  struct Session {
    std::set<AgentId> agents;
    std::optional<PatchRect> subscription;
    std::deque<Outbound> queue;
    std::size_t dropped{0};
    bool connected{true};
    Clock::time_point disconnected_at{};
  };

  void push(SessionId session, const Message& message, bool droppable = false);
  void reply(SessionId session, const Message& request, nlohmann::json body);
  void dispatch(SessionId session, const Message& request);
  void after_step(std::int64_t previous_time, const std::vector<AgentTransition>& transitions);
  nlohmann::json map_patches(const PatchRect& rect, bool with_scent) const;
  PatchRect rect_from(const nlohmann::json& body) const;
  std::filesystem::path save_path(const nlohmann::json& body) const;
  Session& owner_check(SessionId session, AgentId agent);

  mutable std::mutex mutex_;
  Simulator sim_;
  ServerOptions options_;
  std::map<SessionId, Session> sessions_;
  SessionId next_session_{1};
  std::function<void(SessionId)> notifier_;
  std::set<SessionId> touched_;
};

}  // namespace jbw::net
