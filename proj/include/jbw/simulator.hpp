#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jbw/action.hpp"
#include "jbw/config.hpp"
#include "jbw/diffusion.hpp"
#include "jbw/geometry.hpp"
#include "jbw/rng.hpp"
#include "jbw/scent.hpp"
#include "jbw/vision.hpp"
#include "jbw/world_map.hpp"

namespace jbw {

using AgentId = std::uint64_t;

/// Rejected request: unknown agent, duplicate request, or action outside the
/// agent's action space.
class ActionError : public std::runtime_error {
 public:
  enum class Kind { UnknownAgent, Duplicate, NotAllowed, InvalidItem };
  ActionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AgentState {
  AgentId id{0};
  Position position;
  Direction direction{Direction::Up};
  Position spawn;
  int visual_range{8};
  double field_of_view{360.0};
  std::vector<double> color;
  std::vector<double> scent;
  std::vector<ActionKind> action_space;
  std::vector<std::uint64_t> inventory;  // per item type
  std::optional<Action> pending;
  double distance_max{0.0};
  std::int64_t scent_since{0};  // time the agent arrived at `position`

  bool allows(ActionKind kind) const;
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct AgentTransition {
  AgentId agent_id{0};
  Position previous_position;
  Direction previous_direction{Direction::Up};
  Position position;
  Direction direction{Direction::Up};
  Action action;
  std::vector<std::uint32_t> items_collected;
  std::vector<std::uint32_t> items_dropped;
  bool moved{false};
  /// Distance from spawn exceeded the previous running maximum.
  bool explored{false};
  std::int64_t time{0};  // time after the step
};

struct Observation {
  std::int64_t time{0};
  VisionTensor vision;
  std::vector<double> scent;
};

/// Turn-based multi-agent simulator. Not thread-safe: one writer at a time;
/// const member functions may run concurrently between steps.
class Simulator {
 public:
  explicit Simulator(WorldConfig config);

  const WorldConfig& config() const { return *config_; }
  std::shared_ptr<const WorldConfig> shared_config() const { return config_; }
  const WorldMap& map() const { return map_; }
  const DiffusionKernel& kernel() const { return *kernel_; }
  std::int64_t time() const { return time_; }
  const Pcg32& rng() const { return rng_; }
  const std::map<AgentId, AgentState>& agents() const { return agents_; }
  const AgentState& agent(AgentId id) const;
  const std::vector<ScentSource>& scent_sources() const { return sources_; }
  /// Agents with a pending action, in arrival order.
  const std::vector<AgentId>& request_order() const { return request_order_; }

  /// Uses config.agent_defaults.
  AgentId add_agent();
  AgentId add_agent(const AgentConfig& agent_config);
  /// Removes the agent; its scent stops at the current time.
  void remove_agent(AgentId id);

  /// Records the action. When every agent has one, runs step() and returns
  /// its transitions; otherwise returns nullopt.
  std::optional<std::vector<AgentTransition>> request_action(AgentId id, const Action& action);
  bool all_requested() const { return !agents_.empty() && request_order_.size() == agents_.size(); }

  /// Executes every pending action simultaneously and advances time by one.
  std::vector<AgentTransition> step();

  /// Places an item created now on an empty cell of a fixed patch (scripted
  /// scenarios). Returns false when the cell is unavailable.
  bool place_item(Position cell, std::uint32_t type);

  Observation observe(AgentId id) const;
  VisionTensor vision(AgentId id) const;
  std::vector<double> scent_at(Position cell) const;
  /// Scent including cells near the generated frontier (under-counts there).
  std::vector<double> scent_at_unchecked(Position cell) const;
  /// Retired sources plus one open source per agent with non-zero scent.
  std::vector<ScentSource> all_scent_sources() const;

  std::vector<std::uint8_t> save() const;
  static Simulator load(std::span<const std::uint8_t> bytes);
  /// FNV-1a-64 over save().
  std::uint64_t digest() const;

  /// Scent sources are compacted when time is a multiple of this.
  static constexpr std::int64_t kCompactionInterval = 1024;
  static constexpr int kSpawnRetries = 4096;

 private:
  struct Internal {};
  Simulator(Internal, std::shared_ptr<const WorldConfig> config);

  void generate_around(const AgentState& agent);
  std::int64_t generation_radius(const AgentState& agent) const;
  bool cell_blocked(Position cell) const;
  bool try_collect(AgentState& agent, Position cell, AgentTransition& transition);
  void retire_agent_scent(AgentState& agent, std::int64_t end);

  friend class SimulatorCodec;

  std::shared_ptr<const WorldConfig> config_;
  std::shared_ptr<const DiffusionKernel> kernel_;
  WorldMap map_;
  Pcg32 rng_;
  std::int64_t time_{0};
  AgentId next_id_{1};
  std::map<AgentId, AgentState> agents_;
  std::vector<AgentId> request_order_;
  std::vector<ScentSource> sources_;
};

/// Raised by Simulator::load for malformed, truncated or incompatible data.
class SaveFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kSaveVersion = 1;

}  // namespace jbw
