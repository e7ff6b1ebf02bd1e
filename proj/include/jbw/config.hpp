#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "jbw/action.hpp"
#include "jbw/functions.hpp"

namespace jbw {

/// Raised for any invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigVersion = 1;

enum class CollisionPolicy : std::uint8_t { AllowOverlap, FirstComeFirstServe, RandomWinner };

std::string_view to_string(CollisionPolicy policy);

struct AgentConfig {
  std::vector<double> color;
  std::vector<double> scent;
  std::vector<ActionKind> action_space{ActionKind::MoveForward, ActionKind::TurnLeft,
                                       ActionKind::TurnRight};
  int visual_range{8};
  double field_of_view{360.0};  // degrees, in (0, 360]

  bool allows(ActionKind kind) const;
};

struct ItemType {
  std::string name;
  std::vector<double> scent;
  std::vector<double> color;
  double occlusion{0.0};
  bool blocks_movement{false};
  IntensityFn intensity{ZeroIntensity{}};
  /// Dense table indexed by the other item's type id; Zero where unspecified.
  std::vector<InteractionFn> interactions;
  /// Per type id: items the agent must hold to collect this type.
  std::vector<std::uint32_t> collect_requirements;
  /// Per type id: items destroyed from the inventory when collecting this type.
  std::vector<std::uint32_t> collect_costs;
};

struct WorldConfig {
  int scent_dims{3};
  int color_dims{3};
  int patch_size{64};
  int mh_iterations{10000};
  double scent_decay{0.4};
  double scent_diffusion{0.14};
  std::vector<ItemType> item_types;
  AgentConfig agent_defaults;
  CollisionPolicy collision_policy{CollisionPolicy::FirstComeFirstServe};
  std::uint64_t seed{0};

  std::optional<std::uint32_t> type_index(std::string_view name) const;
  const InteractionFn& interaction(std::uint32_t first, std::uint32_t second) const {
    return item_types[first].interactions[second];
  }

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

WorldConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const WorldConfig& config);
WorldConfig parse_config(std::string_view text);
WorldConfig load_config(const std::filesystem::path& path);

/// Canonical JSON text (sorted keys, compact). Stable across runs.
std::string canonical_config_text(const WorldConfig& config);

}  // namespace jbw
