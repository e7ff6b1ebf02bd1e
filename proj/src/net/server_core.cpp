#include "jbw/net/server_core.hpp"

#include <fstream>
#include <iterator>

#include "jbw/hash.hpp"

namespace jbw::net {

namespace {

std::uint64_t config_digest(const WorldConfig& config) {
  const std::string text = canonical_config_text(config);
  Fnv1a64 h;
  h.update(text.data(), text.size());
  return h.value();
}

nlohmann::json agent_json(const AgentState& a) {
  return {{"id", a.id}, {"position", position_json(a.position)}, {"direction", to_string(a.direction)}};
}

}  // namespace

ServerCore::ServerCore(Simulator simulator, ServerOptions options)
    : sim_(std::move(simulator)), options_(std::move(options)) {}

SessionId ServerCore::open_session() {
  const std::lock_guard lock(mutex_);
  const SessionId id = next_session_++;
  sessions_.emplace(id, Session{});
  return id;
}

void ServerCore::set_notifier(std::function<void(SessionId)> notifier) {
  const std::lock_guard lock(mutex_);
  notifier_ = std::move(notifier);
}

void ServerCore::push(SessionId session, const Message& message, bool droppable) {
  const auto it = sessions_.find(session);
  if (it == sessions_.end() || !it->second.connected) return;
  Session& s = it->second;
  if (s.queue.size() >= options_.queue_capacity) {
    const auto victim = std::find_if(s.queue.begin(), s.queue.end(), [](const Outbound& o) { return o.droppable; });
    if (victim != s.queue.end()) {
      s.queue.erase(victim);
      ++s.dropped;
    } else if (droppable) {
      ++s.dropped;
      return;
    }
  }
  s.queue.push_back({encode(message), droppable});
  touched_.insert(session);
}

void ServerCore::reply(SessionId session, const Message& request, nlohmann::json body) {
  const std::string type = request.type == "get_map" ? "map_patches" : request.type;
  push(session, {kProtocolVersion, request.id, type, std::move(body)});
}

bool ServerCore::handle(SessionId session, std::string_view frame) {
  bool keep = true;
  std::set<SessionId> touched;
  std::function<void(SessionId)> notifier;
  {
    const std::lock_guard lock(mutex_);
    if (!sessions_.contains(session)) return false;
    std::uint64_t id = 0;
    try {
      const Message request = decode(frame);
      id = request.id;
      dispatch(session, request);
    } catch (const ProtocolError& e) {
      push(session, error_message(id, e.code(), e.what()));
      keep = e.code() != "malformed" && e.code() != "version";
    } catch (const ActionError& e) {
      static constexpr const char* kCodes[] = {"unknown-agent", "duplicate", "not-allowed", "invalid"};
      push(session, error_message(id, kCodes[static_cast<int>(e.kind())], e.what()));
    } catch (const SaveFormatError& e) {
      push(session, error_message(id, "corrupt-save", e.what()));
    } catch (const std::exception& e) {
      push(session, error_message(id, "invalid", e.what()));
    }
    touched.swap(touched_);
    notifier = notifier_;
  }
  if (notifier) {
    for (SessionId s : touched) notifier(s);
  }
  return keep;
}

ServerCore::Session& ServerCore::owner_check(SessionId session, AgentId agent) {
  Session& s = sessions_.at(session);
  if (!sim_.agents().contains(agent)) throw ProtocolError("unknown-agent", "unknown agent " + std::to_string(agent));
  if (!s.agents.contains(agent)) throw ProtocolError("not-owner", "session does not own agent " + std::to_string(agent));
  return s;
}

PatchRect ServerCore::rect_from(const nlohmann::json& body) const {
  if (!body.contains("min") || !body.contains("max")) throw ProtocolError("invalid", "region needs \"min\" and \"max\"");
  const PatchRect r{position_from_json(body.at("min")), position_from_json(body.at("max"))};
  if (r.max.x < r.min.x || r.max.y < r.min.y) throw ProtocolError("invalid", "empty region");
  return r;
}

std::filesystem::path ServerCore::save_path(const nlohmann::json& body) const {
  const std::string name = body.value("file", std::string{});
  if (name.empty() || name.front() == '.' || name.find_first_of("/\\") != std::string::npos) {
    throw ProtocolError("invalid", "\"file\" must be a plain file name");
  }
  return options_.save_dir / name;
}

void ServerCore::dispatch(SessionId session, const Message& request) {
  const nlohmann::json& body = request.body;
  const std::string& type = request.type;

  if (type == "hello") {
    reply(session, request,
          {{"version", kProtocolVersion},
           {"time", sim_.time()},
           {"config_digest", hex64(config_digest(sim_.config()))},
           {"session", session}});
  } else if (type == "add_agent") {
    const AgentId id = sim_.add_agent();
    sessions_.at(session).agents.insert(id);
    reply(session, request, agent_json(sim_.agent(id)));
  } else if (type == "remove_agent") {
    const AgentId id = body.at("agent_id").get<AgentId>();
    owner_check(session, id).agents.erase(id);
    sim_.remove_agent(id);
    reply(session, request, {{"agent_id", id}});
    if (sim_.all_requested()) {
      const std::int64_t before = sim_.time();
      after_step(before, sim_.step());
    }
  } else if (type == "act") {
    const AgentId id = body.at("agent_id").get<AgentId>();
    owner_check(session, id);
    const Action action = action_from_json(body.at("action"), sim_.config());
    const std::int64_t before = sim_.time();
    if (sim_.agent(id).pending) throw ProtocolError("duplicate", "agent already acted this turn");
    auto transitions = sim_.request_action(id, action);
    reply(session, request, {{"agent_id", id}, {"time", before}});
    if (transitions) after_step(before, *transitions);
  } else if (type == "get_map") {
    const PatchRect r = rect_from(body);
    reply(session, request, map_patches(r, body.value("scent", false)));
  } else if (type == "subscribe") {
    sessions_.at(session).subscription = rect_from(body);
    reply(session, request, nlohmann::json::object());
  } else if (type == "unsubscribe") {
    sessions_.at(session).subscription.reset();
    reply(session, request, nlohmann::json::object());
  } else if (type == "save") {
    const auto path = save_path(body);
    const std::vector<std::uint8_t> bytes = sim_.save();
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ProtocolError("io", "cannot write " + path.string());
    Fnv1a64 h;
    h.update(bytes.data(), bytes.size());
    reply(session, request, {{"file", path.filename().string()}, {"bytes", bytes.size()}, {"digest", hex64(h.value())}});
  } else if (type == "load") {
    const auto path = save_path(body);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProtocolError("io", "cannot read " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    sim_ = Simulator::load(bytes);
    for (auto& [id, s] : sessions_) s.agents.clear();
    reply(session, request, {{"time", sim_.time()}, {"digest", hex64(sim_.digest())}});
  } else {
    throw ProtocolError("unknown-type", "unknown message type '" + type + "'");
  }
}

void ServerCore::after_step(std::int64_t previous_time, const std::vector<AgentTransition>& transitions) {
  const WorldConfig& config = sim_.config();
  for (const AgentTransition& t : transitions) {
    for (auto& [sid, s] : sessions_) {
      if (!s.agents.contains(t.agent_id)) continue;
      const Observation o = sim_.observe(t.agent_id);
      nlohmann::json collected = nlohmann::json::array();
      for (std::uint32_t type : t.items_collected) collected.push_back(config.item_types[type].name);
      nlohmann::json body = {{"agent_id", t.agent_id}, {"time", o.time},         {"vision", vision_json(o.vision)},
                             {"scent", o.scent},       {"moved", t.moved},       {"collected", collected},
                             {"position", position_json(t.position)}, {"direction", to_string(t.direction)}};
      if (options_.schedule) body["reward"] = eval_reward(options_.schedule->at(previous_time), t);
      push(sid, {kProtocolVersion, 0, "observation", std::move(body)});
    }
  }
  for (auto& [sid, s] : sessions_) {
    if (s.agents.empty() && !s.subscription) continue;
    nlohmann::json body = {{"time", sim_.time()}};
    if (s.subscription) {
      const int p = sim_.config().patch_size;
      nlohmann::json agents = nlohmann::json::array();
      for (const auto& [id, a] : sim_.agents()) {
        const Position c{floor_div(a.position.x, p), floor_div(a.position.y, p)};
        if (c.x >= s.subscription->min.x && c.x <= s.subscription->max.x && c.y >= s.subscription->min.y &&
            c.y <= s.subscription->max.y) {
          agents.push_back(agent_json(a));
        }
      }
      body["agents"] = std::move(agents);
    }
    body["dropped"] = s.dropped;
    push(sid, {kProtocolVersion, 0, "step_done", std::move(body)}, true);
  }
}

nlohmann::json ServerCore::map_patches(const PatchRect& r, bool with_scent) const {
  const auto count = static_cast<std::uint64_t>(r.max.x - r.min.x + 1) * static_cast<std::uint64_t>(r.max.y - r.min.y + 1);
  if (count > options_.max_map_patches) {
    throw ProtocolError("oversized", "at most " + std::to_string(options_.max_map_patches) + " patches per request");
  }
  const WorldMap& map = sim_.map();
  const int p = map.patch_size();
  nlohmann::json patches = nlohmann::json::array();
  for (std::int64_t y = r.min.y; y <= r.max.y; ++y) {
    for (std::int64_t x = r.min.x; x <= r.max.x; ++x) {
      const Patch* patch = map.find({x, y});
      nlohmann::json entry = {{"coord", position_json({x, y})}};
      if (patch == nullptr) {
        entry["status"] = "none";
      } else if (patch->status() == PatchStatus::Speculative) {
        entry["status"] = "speculative";
      } else {
        entry["status"] = "fixed";
        nlohmann::json items = nlohmann::json::array();
        for (const Item& item : patch->items()) {
          items.push_back({{"position", position_json(item.position)}, {"type", map.config().item_types[item.type].name}});
        }
        entry["items"] = std::move(items);
        nlohmann::json agents = nlohmann::json::array();
        for (const auto& [id, a] : sim_.agents()) {
          if (patch->contains(a.position)) agents.push_back(agent_json(a));
        }
        entry["agents"] = std::move(agents);
        if (with_scent) {
          const std::vector<ScentSource> sources = sim_.all_scent_sources();
          nlohmann::json scent = nlohmann::json::array();
          const Position o = patch->origin();
          for (int dy = 0; dy < p; ++dy) {
            for (int dx = 0; dx < p; ++dx) {
              scent.push_back(scent_at_unchecked(map, sources, o + Position{dx, dy}, sim_.time(), sim_.kernel()));
            }
          }
          entry["scent"] = std::move(scent);
        }
      }
      patches.push_back(std::move(entry));
    }
  }
  return {{"patches", std::move(patches)}, {"time", sim_.time()}};
}

void ServerCore::close_session(SessionId session, Clock::time_point now) {
  const std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session);
  if (it == sessions_.end()) return;
  if (it->second.agents.empty()) {
    sessions_.erase(it);
    return;
  }
  it->second.connected = false;
  it->second.disconnected_at = now;
  it->second.queue.clear();
}

void ServerCore::tick(Clock::time_point now) {
  std::set<SessionId> touched;
  std::function<void(SessionId)> notifier;
  {
    const std::lock_guard lock(mutex_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      Session& s = it->second;
      if (s.connected || now - s.disconnected_at < options_.grace) {
        ++it;
        continue;
      }
      for (AgentId id : s.agents) {
        if (sim_.agents().contains(id)) sim_.remove_agent(id);
      }
      it = sessions_.erase(it);
      if (sim_.all_requested()) {
        const std::int64_t before = sim_.time();
        after_step(before, sim_.step());
      }
    }
    touched.swap(touched_);
    notifier = notifier_;
  }
  if (notifier) {
    for (SessionId s : touched) notifier(s);
  }
}

std::vector<std::string> ServerCore::drain(SessionId session) {
  const std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  const auto it = sessions_.find(session);
  if (it == sessions_.end()) return out;
  for (Outbound& o : it->second.queue) out.push_back(std::move(o.frame));
  it->second.queue.clear();
  return out;
}

std::size_t ServerCore::dropped(SessionId session) const {
  const std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session);
  return it == sessions_.end() ? 0 : it->second.dropped;
}

std::size_t ServerCore::session_count() const {
  const std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::int64_t ServerCore::time() const {
  const std::lock_guard lock(mutex_);
  return sim_.time();
}

std::uint64_t ServerCore::digest() const {
  const std::lock_guard lock(mutex_);
  return sim_.digest();
}

std::vector<std::uint8_t> ServerCore::save() const {
  const std::lock_guard lock(mutex_);
  return sim_.save();
}

}  // namespace jbw::net
