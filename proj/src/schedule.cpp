#include "jbw/schedule.hpp"

#include <fstream>

namespace jbw {

namespace {

void check_stages(const std::vector<ScheduleStage>& stages) {
  if (stages.empty()) throw ConfigError("reward schedule needs at least one stage");
  for (const ScheduleStage& s : stages) {
    if (s.steps < 1) throw ConfigError("schedule stage lengths must be positive");
  }
}

}  // namespace

RewardSchedule RewardSchedule::fixed(RewardExpr reward) { return {Kind::Fixed, {{std::move(reward), 1}}}; }

RewardSchedule RewardSchedule::curriculum(std::vector<ScheduleStage> stages) {
  check_stages(stages);
  return {Kind::Curriculum, std::move(stages)};
}

RewardSchedule RewardSchedule::cyclical(std::vector<ScheduleStage> stages) {
  check_stages(stages);
  return {Kind::Cyclical, std::move(stages)};
}

const RewardExpr& RewardSchedule::at(std::int64_t time) const {
  if (kind == Kind::Fixed || stages.size() == 1) return stages.front().reward;
  if (kind == Kind::Cyclical) {
    std::int64_t period = 0;
    for (const ScheduleStage& s : stages) period += s.steps;
    time %= period;
  }
  for (const ScheduleStage& s : stages) {
    if (time < s.steps) return s.reward;
    time -= s.steps;
  }
  return stages.back().reward;
}

RewardSchedule schedule_from_json(const nlohmann::json& doc, const WorldConfig& config) {
  if (!doc.is_object() || !doc.contains("type")) throw ConfigError("schedule must be an object with a \"type\"");
  const std::string type = doc.at("type").get<std::string>();
  if (type == "fixed") {
    if (!doc.contains("reward")) throw ConfigError("fixed schedule needs \"reward\"");
    return RewardSchedule::fixed(parse_reward(doc.at("reward").get<std::string>(), config));
  }
  if (type != "curriculum" && type != "cyclical") throw ConfigError("unknown schedule type '" + type + "'");
  if (!doc.contains("stages") || !doc.at("stages").is_array()) throw ConfigError("schedule needs a \"stages\" array");
  std::vector<ScheduleStage> stages;
  for (const auto& s : doc.at("stages")) {
    stages.push_back({parse_reward(s.at("reward").get<std::string>(), config), s.at("steps").get<std::int64_t>()});
  }
  return type == "curriculum" ? RewardSchedule::curriculum(std::move(stages))
                              : RewardSchedule::cyclical(std::move(stages));
}

RewardSchedule load_schedule(const std::filesystem::path& path, const WorldConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return schedule_from_json(doc, config);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json schedule_to_json(const RewardSchedule& schedule, const WorldConfig& config) {
  if (schedule.kind == RewardSchedule::Kind::Fixed) {
    return {{"type", "fixed"}, {"reward", to_string(schedule.stages.front().reward, config)}};
  }
  nlohmann::json stages = nlohmann::json::array();
  for (const ScheduleStage& s : schedule.stages) {
    stages.push_back({{"reward", to_string(s.reward, config)}, {"steps", s.steps}});
  }
  return {{"type", schedule.kind == RewardSchedule::Kind::Curriculum ? "curriculum" : "cyclical"},
          {"stages", stages}};
}

}  // namespace jbw
