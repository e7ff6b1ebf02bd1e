#include "jbw/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "jbw/hash.hpp"

namespace jbw {

namespace {

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double distance(Position a, Position b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

}  // namespace

bool AgentState::allows(ActionKind kind) const {
  return std::find(action_space.begin(), action_space.end(), kind) != action_space.end();
}

Simulator::Simulator(WorldConfig config) : Simulator(Internal{}, std::make_shared<const WorldConfig>(std::move(config))) {
  rng_ = Pcg32(config_->seed);
}

Simulator::Simulator(Internal, std::shared_ptr<const WorldConfig> config)
    : config_(std::move(config)),
      kernel_(DiffusionKernel::shared(config_->scent_decay, config_->scent_diffusion)),
      map_(config_) {
  config_->validate();
}

const AgentState& Simulator::agent(AgentId id) const {
  const auto it = agents_.find(id);
  if (it == agents_.end()) throw ActionError(ActionError::Kind::UnknownAgent, "unknown agent " + std::to_string(id));
  return it->second;
}

std::int64_t Simulator::generation_radius(const AgentState& agent) const {
  return std::max<std::int64_t>(agent.visual_range, kernel_->radius());
}

void Simulator::generate_around(const AgentState& agent) {
  map_.ensure_generated(agent.position, generation_radius(agent), rng_);
}

bool Simulator::cell_blocked(Position cell) const {
  const Item* item = map_.item_at(cell);
  return item != nullptr && config_->item_types[item->type].blocks_movement;
}

AgentId Simulator::add_agent() { return add_agent(config_->agent_defaults); }

AgentId Simulator::add_agent(const AgentConfig& agent_config) {
  if (agent_config.color.size() != static_cast<std::size_t>(config_->color_dims) ||
      agent_config.scent.size() != static_cast<std::size_t>(config_->scent_dims)) {
    throw ConfigError("agent color/scent dimensions do not match the world");
  }
  if (agent_config.visual_range < 1) throw ConfigError("visual range must be positive");
  if (!(agent_config.field_of_view > 0.0 && agent_config.field_of_view <= 360.0)) {
    throw ConfigError("field of view must lie in (0, 360]");
  }

  map_.ensure_generated({0, 0}, 0, rng_);
  const auto occupied = [&](Position cell) {
    return std::any_of(agents_.begin(), agents_.end(), [&](const auto& kv) { return kv.second.position == cell; });
  };
  const auto usable = [&](Position cell) { return !cell_blocked(cell) && !occupied(cell); };

  std::optional<Position> spawn;
  if (next_id_ == 1 && usable({0, 0})) spawn = Position{0, 0};
  const auto p = static_cast<std::uint32_t>(config_->patch_size);
  for (int attempt = 0; !spawn && attempt < kSpawnRetries; ++attempt) {
    const Position cell{rng_.uniform_int(p), rng_.uniform_int(p)};
    if (usable(cell)) spawn = cell;
  }
  if (!spawn) throw SpawnError("no free spawn cell found in the origin patch");

  AgentState agent;
  agent.id = next_id_++;
  agent.position = *spawn;
  agent.spawn = *spawn;
  agent.visual_range = agent_config.visual_range;
  agent.field_of_view = agent_config.field_of_view;
  agent.color = agent_config.color;
  agent.scent = agent_config.scent;
  agent.action_space = agent_config.action_space;
  agent.inventory.assign(config_->item_types.size(), 0);
  agent.scent_since = time_;
  generate_around(agent);
  const AgentId id = agent.id;
  agents_.emplace(id, std::move(agent));
  return id;
}

void Simulator::retire_agent_scent(AgentState& agent, std::int64_t end) {
  if (!all_zero(agent.scent) && end > agent.scent_since) {
    sources_.push_back({agent.position, agent.scent, agent.scent_since, end});
  }
  agent.scent_since = end;
}

void Simulator::remove_agent(AgentId id) {
  const auto it = agents_.find(id);
  if (it == agents_.end()) throw ActionError(ActionError::Kind::UnknownAgent, "unknown agent " + std::to_string(id));
  retire_agent_scent(it->second, time_);
  agents_.erase(it);
  std::erase(request_order_, id);
}

std::optional<std::vector<AgentTransition>> Simulator::request_action(AgentId id, const Action& action) {
  const auto it = agents_.find(id);
  if (it == agents_.end()) throw ActionError(ActionError::Kind::UnknownAgent, "unknown agent " + std::to_string(id));
  AgentState& agent = it->second;
  if (agent.pending) throw ActionError(ActionError::Kind::Duplicate, "agent already acted this turn");
  if (!agent.allows(action.kind)) {
    throw ActionError(ActionError::Kind::NotAllowed,
                      std::string(to_string(action.kind)) + " is not in the agent's action space");
  }
  if (action.kind == ActionKind::Drop && action.item >= config_->item_types.size()) {
    throw ActionError(ActionError::Kind::InvalidItem, "unknown item type for Drop");
  }
  agent.pending = action;
  request_order_.push_back(id);
  if (all_requested()) return step();
  return std::nullopt;
}

bool Simulator::try_collect(AgentState& agent, Position cell, AgentTransition& transition) {
  const Item* item = map_.item_at(cell);
  if (item == nullptr) return false;
  const ItemType& type = config_->item_types[item->type];
  if (type.blocks_movement) return false;
  for (std::size_t k = 0; k < agent.inventory.size(); ++k) {
    if (agent.inventory[k] < type.collect_requirements[k]) return false;
  }
  for (std::size_t k = 0; k < agent.inventory.size(); ++k) {
    if (agent.inventory[k] < type.collect_costs[k]) return false;
  }
  for (std::size_t k = 0; k < agent.inventory.size(); ++k) agent.inventory[k] -= type.collect_costs[k];

  const Item removed = *map_.remove_item(cell);
  if (!all_zero(type.scent) && time_ + 1 > removed.created_at) {
    sources_.push_back({removed.position, type.scent, removed.created_at, time_ + 1});
  }
  ++agent.inventory[removed.type];
  transition.items_collected.push_back(removed.type);
  return true;
}

std::vector<AgentTransition> Simulator::step() {
  if (!all_requested()) throw std::logic_error("step requires an action from every agent");
  const std::int64_t next_time = time_ + 1;

  std::vector<AgentTransition> transitions;
  std::vector<AgentState*> order;
  for (AgentId id : request_order_) {
    AgentState& a = agents_.at(id);
    order.push_back(&a);
    AgentTransition t;
    t.agent_id = id;
    t.previous_position = a.position;
    t.previous_direction = a.direction;
    t.action = *a.pending;
    transitions.push_back(std::move(t));
  }

  for (AgentState* a : order) {
    if (a->pending->kind == ActionKind::TurnLeft) a->direction = turn_left(a->direction);
    if (a->pending->kind == ActionKind::TurnRight) a->direction = turn_right(a->direction);
  }

  // Targets, then conflict resolution until no cell holds two agents.
  std::vector<Position> target(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const AgentState& a = *order[i];
    target[i] = a.position;
    if (a.pending->kind == ActionKind::MoveForward) {
      const Position ahead = a.position + forward_vector(a.direction);
      if (!cell_blocked(ahead)) target[i] = ahead;
    }
  }
  if (config_->collision_policy != CollisionPolicy::AllowOverlap) {
    for (bool changed = true; changed;) {
      changed = false;
      std::map<Position, std::vector<std::size_t>> claims;
      for (std::size_t i = 0; i < order.size(); ++i) claims[target[i]].push_back(i);
      for (auto& [cell, who] : claims) {
        if (who.size() < 2) continue;
        std::size_t winner = who.front();
        const auto stays = std::find_if(who.begin(), who.end(), [&](std::size_t i) { return order[i]->position == cell; });
        if (stays != who.end()) {
          winner = *stays;
        } else if (config_->collision_policy == CollisionPolicy::RandomWinner) {
          winner = who[rng_.uniform_int(static_cast<std::uint32_t>(who.size()))];
        }
        for (std::size_t i : who) {
          if (i != winner && target[i] != order[i]->position) {
            target[i] = order[i]->position;
            changed = true;
          }
        }
      }
    }
  }

  for (std::size_t i = 0; i < order.size(); ++i) {
    AgentState& a = *order[i];
    if (target[i] == a.position) continue;
    retire_agent_scent(a, next_time);
    a.position = target[i];
    transitions[i].moved = true;
  }

  for (std::size_t i = 0; i < order.size(); ++i) {
    AgentState& a = *order[i];
    AgentTransition& t = transitions[i];
    const Action act = *a.pending;
    if (act.kind == ActionKind::Collect) {
      try_collect(a, a.position, t);
    } else if (t.moved && !a.allows(ActionKind::Collect)) {
      try_collect(a, a.position, t);
    } else if (act.kind == ActionKind::Drop && a.inventory[act.item] > 0 && map_.item_at(a.position) == nullptr) {
      if (map_.place_item({a.position, act.item, next_time})) {
        --a.inventory[act.item];
        t.items_dropped.push_back(act.item);
      }
    }
  }

  time_ = next_time;
  for (std::size_t i = 0; i < order.size(); ++i) {
    AgentState& a = *order[i];
    AgentTransition& t = transitions[i];
    a.pending.reset();
    generate_around(a);
    const double d = distance(a.position, a.spawn);
    if (d > a.distance_max) {
      a.distance_max = d;
      t.explored = true;
    }
    t.position = a.position;
    t.direction = a.direction;
    t.time = time_;
  }
  request_order_.clear();
  if (time_ % kCompactionInterval == 0) compact_scent_sources(sources_, time_, *kernel_);
  return transitions;
}

bool Simulator::place_item(Position cell, std::uint32_t type) {
  if (type >= config_->item_types.size()) throw std::invalid_argument("unknown item type");
  return map_.place_item({cell, type, time_});
}

std::vector<ScentSource> Simulator::all_scent_sources() const {
  std::vector<ScentSource> all = sources_;
  for (const auto& [id, a] : agents_) {
    if (!all_zero(a.scent)) all.push_back({a.position, a.scent, a.scent_since, std::nullopt});
  }
  return all;
}

std::vector<double> Simulator::scent_at(Position cell) const {
  return jbw::scent_at(map_, all_scent_sources(), cell, time_, *kernel_);
}

std::vector<double> Simulator::scent_at_unchecked(Position cell) const {
  return jbw::scent_at_unchecked(map_, all_scent_sources(), cell, time_, *kernel_);
}

VisionTensor Simulator::vision(AgentId id) const {
  const AgentState& a = agent(id);
  std::vector<VisibleAgent> visible;
  for (const auto& [other_id, other] : agents_) {
    if (chebyshev(other.position, a.position) <= a.visual_range) visible.push_back({other.position, other.color});
  }
  return render_vision(map_, visible, {a.position, a.direction, a.visual_range, a.field_of_view});
}

Observation Simulator::observe(AgentId id) const {
  const AgentState& a = agent(id);
  return {time_, vision(id), scent_at(a.position)};
}

std::uint64_t Simulator::digest() const {
  const std::vector<std::uint8_t> bytes = save();
  Fnv1a64 h;
  h.update(bytes.data(), bytes.size());
  return h.value();
}

}  // namespace jbw
