#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "jbw/reward.hpp"

namespace jbw {

struct ScheduleStage {
  RewardExpr reward;
  std::int64_t steps{1};
};

/// Fixed uses stages[0] forever. Curriculum walks the stages and keeps the
/// last one. Cyclical walks them and starts over.
struct RewardSchedule {
  enum class Kind : std::uint8_t { Fixed, Curriculum, Cyclical };
  Kind kind{Kind::Fixed};
  std::vector<ScheduleStage> stages;

  static RewardSchedule fixed(RewardExpr reward);
  static RewardSchedule curriculum(std::vector<ScheduleStage> stages);
  static RewardSchedule cyclical(std::vector<ScheduleStage> stages);

  const RewardExpr& at(std::int64_t time) const;
};

inline const RewardExpr& schedule_at(const RewardSchedule& schedule, std::int64_t time) { return schedule.at(time); }

/// {"type": "fixed", "reward": "<dsl>"} or
/// {"type": "curriculum" | "cyclical", "stages": [{"reward": "<dsl>", "steps": n}, ...]}.
/// Throws ConfigError or RewardParseError.
RewardSchedule schedule_from_json(const nlohmann::json& doc, const WorldConfig& config);
RewardSchedule load_schedule(const std::filesystem::path& path, const WorldConfig& config);
nlohmann::json schedule_to_json(const RewardSchedule& schedule, const WorldConfig& config);

}  // namespace jbw
