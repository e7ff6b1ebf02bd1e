#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "jbw/environment.hpp"
#include "jbw/greedy.hpp"

namespace jbw {

/// c_r: colour of the first positively rewarded Collect item; c_o: colour of
/// the first negatively rewarded one; c_w: the colours of every item type
/// that blocks movement.
GreedyTargets greedy_targets(const RewardExpr& reward, const WorldConfig& config);

struct LoggedAction {
  std::int64_t time{0};
  AgentId agent{0};
  Action action;

  friend bool operator==(const LoggedAction&, const LoggedAction&) = default;
};

/// "<time> <agent_id> <ActionKind>[ <item name>]"
std::string format_log_line(const LoggedAction& entry, const WorldConfig& config);
LoggedAction parse_log_line(std::string_view line, const WorldConfig& config);
/// Skips blank lines and lines starting with '#'.
std::vector<LoggedAction> read_action_log(std::istream& in, const WorldConfig& config);

/// Re-applies `log` in order. Entries must be in request order; each turn
/// completes once every agent has acted. Throws std::runtime_error when an
/// entry's time does not match the simulator.
void replay(Simulator& sim, const std::vector<LoggedAction>& log);

enum class AgentKind { Greedy, Random };

struct RunOptions {
  AgentKind agent{AgentKind::Greedy};
  std::int64_t steps{1};
  std::uint64_t policy_seed{0};
  /// Called after every step with the log entry and its result.
  std::function<void(const LoggedAction&, const EnvStep&)> on_step;
  /// Greedy only: see GreedyAgent.
  bool forward_when_clear{false};
};

/// Drives the environment's single agent for `steps` steps.
void run_agent(Environment& env, const RunOptions& options);

}  // namespace jbw
