#include "jbw/experiment.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace jbw {

namespace {

void collect_targets(const RewardExpr& e, std::optional<std::uint32_t>& reward, std::optional<std::uint32_t>& avoid) {
  if (e.kind == RewardExpr::Kind::Combined) {
    collect_targets(*e.left, reward, avoid);
    collect_targets(*e.right, reward, avoid);
  } else if (e.kind == RewardExpr::Kind::Collect) {
    if (e.value > 0 && !reward) reward = e.item;
    if (e.value < 0 && !avoid) avoid = e.item;
  }
}

template <typename T>
T parse_int(std::string_view s, std::string_view what) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw std::runtime_error("action log: bad " + std::string(what));
  return v;
}

}  // namespace

GreedyTargets greedy_targets(const RewardExpr& reward, const WorldConfig& config) {
  std::optional<std::uint32_t> r;
  std::optional<std::uint32_t> o;
  collect_targets(reward, r, o);
  GreedyTargets t;
  t.reward.assign(static_cast<std::size_t>(config.color_dims), 0.0);
  if (r) t.reward = config.item_types[*r].color;
  if (o) t.avoid = config.item_types[*o].color;
  for (const ItemType& type : config.item_types) {
    if (type.blocks_movement) t.obstacles.push_back(type.color);
  }
  return t;
}

std::string format_log_line(const LoggedAction& e, const WorldConfig& config) {
  std::string line = std::to_string(e.time) + " " + std::to_string(e.agent) + " " + std::string(to_string(e.action.kind));
  if (e.action.kind == ActionKind::Drop) line += " " + config.item_types.at(e.action.item).name;
  return line;
}

LoggedAction parse_log_line(std::string_view line, const WorldConfig& config) {
  std::istringstream in{std::string(line)};
  std::string time, agent, kind, item;
  if (!(in >> time >> agent >> kind)) throw std::runtime_error("action log: malformed line '" + std::string(line) + "'");
  in >> item;
  LoggedAction e;
  e.time = parse_int<std::int64_t>(time, "time");
  e.agent = parse_int<AgentId>(agent, "agent id");
  const auto k = parse_action_kind(kind);
  if (!k) throw std::runtime_error("action log: unknown action '" + kind + "'");
  e.action.kind = *k;
  if (*k == ActionKind::Drop) {
    const auto id = config.type_index(item);
    if (!id) throw std::runtime_error("action log: unknown item '" + item + "'");
    e.action.item = *id;
  }
  return e;
}

std::vector<LoggedAction> read_action_log(std::istream& in, const WorldConfig& config) {
  std::vector<LoggedAction> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    out.push_back(parse_log_line(line, config));
  }
  return out;
}

void replay(Simulator& sim, const std::vector<LoggedAction>& log) {
  for (const LoggedAction& e : log) {
    if (e.time != sim.time()) {
      throw std::runtime_error("action log entry for time " + std::to_string(e.time) + " but simulator is at " +
                               std::to_string(sim.time()));
    }
    sim.request_action(e.agent, e.action);
  }
}

void run_agent(Environment& env, const RunOptions& options) {
  const Simulator& sim = env.simulator();
  const AgentState& agent = sim.agent(env.agent_id());
  const WorldConfig& config = sim.config();
  Pcg32 rng(options.policy_seed, 0x6a62775f706f6c69ULL);
  std::optional<GreedyAgent> greedy;
  VisionTensor vision;
  if (options.agent == AgentKind::Greedy) {
    greedy.emplace(greedy_targets(env.schedule().at(sim.time()), config), agent.field_of_view, options.policy_seed,
                   options.forward_when_clear);
    vision = sim.vision(env.agent_id());
  }
  for (std::int64_t i = 0; i < options.steps; ++i) {
    const std::int64_t time = sim.time();
    const Action action = greedy ? greedy->act(vision)
                                 : random_policy(agent.action_space, rng,
                                                 static_cast<std::uint32_t>(config.item_types.size()));
    const EnvStep result = env.step(action);
    if (greedy) vision = result.observation.vision;
    if (options.on_step) options.on_step({time, env.agent_id(), action}, result);
  }
}

}  // namespace jbw
