#include "jbw/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace jbw {

using nlohmann::json;

namespace {

constexpr std::string_view kPolicyNames[] = {"allow-overlap", "first-come-first-serve",
                                             "random-winner"};

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key == "description") continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
T required(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) throw ConfigError("missing '" + std::string(key) + "' in " + std::string(where));
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + std::string(where) + ": " + e.what());
  }
}

template <class T>
T optional_value(const json& obj, const char* key, T fallback, std::string_view where) {
  if (!obj.contains(key)) return fallback;
  return required<T>(obj, key, where);
}

CollisionPolicy parse_policy(const std::string& text) {
  for (std::size_t i = 0; i < std::size(kPolicyNames); ++i) {
    if (kPolicyNames[i] == text) return static_cast<CollisionPolicy>(i);
  }
  throw ConfigError("unknown collision_policy '" + text + "'");
}

void check_vector(const std::vector<double>& v, int dims, const std::string& what) {
  if (static_cast<int>(v.size()) != dims) {
    throw ConfigError(what + " has length " + std::to_string(v.size()) + ", expected " + std::to_string(dims));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw ConfigError(what + " contains a non-finite value");
  }
}

}  // namespace

std::string_view to_string(CollisionPolicy policy) { return kPolicyNames[static_cast<int>(policy)]; }

bool AgentConfig::allows(ActionKind kind) const {
  return std::find(action_space.begin(), action_space.end(), kind) != action_space.end();
}

std::optional<std::uint32_t> WorldConfig::type_index(std::string_view name) const {
  for (std::size_t i = 0; i < item_types.size(); ++i) {
    if (item_types[i].name == name) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

void WorldConfig::validate() const {
  if (scent_dims <= 0) throw ConfigError("scent_dimensions must be positive");
  if (color_dims <= 0) throw ConfigError("color_dimensions must be positive");
  if (patch_size <= 0) throw ConfigError("patch_size must be positive");
  if (mh_iterations <= 0) throw ConfigError("mh_iterations must be positive");
  if (!(scent_decay >= 0.0 && scent_decay < 1.0)) throw ConfigError("scent_decay must lie in [0, 1)");
  if (!(scent_diffusion >= 0.0)) throw ConfigError("scent_diffusion must be non-negative");
  if (!(scent_decay + 4.0 * scent_diffusion < 1.0)) {
    throw ConfigError("scent_decay + 4 * scent_diffusion must be < 1 for the scent field to converge");
  }
  if (item_types.empty()) throw ConfigError("at least one item type is required");

  const std::size_t n = item_types.size();
  std::set<std::string> names;
  for (const ItemType& t : item_types) {
    if (t.name.empty()) throw ConfigError("item type name must be non-empty");
    if (!names.insert(t.name).second) throw ConfigError("duplicate item type '" + t.name + "'");
    check_vector(t.scent, scent_dims, "scent of " + t.name);
    check_vector(t.color, color_dims, "color of " + t.name);
    if (!(t.occlusion >= 0.0 && t.occlusion <= 1.0)) throw ConfigError("occlusion of " + t.name + " must lie in [0, 1]");
    if (t.interactions.size() != n || t.collect_requirements.size() != n || t.collect_costs.size() != n) {
      throw ConfigError("per-type tables of " + t.name + " must have one entry per item type");
    }
    if (const auto* r = std::get_if<RadialHashIntensity>(&t.intensity); r != nullptr && r->scale == 0) {
      throw ConfigError("RadialHash scale of " + t.name + " must be non-zero");
    }
    for (const InteractionFn& g : t.interactions) {
      if (const auto* h = std::get_if<CrossHashInteraction>(&g); h != nullptr && h->scale == 0) {
        throw ConfigError("CrossHash scale in " + t.name + " must be non-zero");
      }
    }
  }

  const AgentConfig& a = agent_defaults;
  check_vector(a.color, color_dims, "agent color");
  check_vector(a.scent, scent_dims, "agent scent");
  if (a.visual_range <= 0) throw ConfigError("visual_range must be positive");
  if (!(a.field_of_view > 0.0 && a.field_of_view <= 360.0)) throw ConfigError("field_of_view must lie in (0, 360]");
  if (a.action_space.empty()) throw ConfigError("action_space must not be empty");
}

WorldConfig config_from_json(const json& doc) {
  check_keys(doc, "config", {"version", "map", "agent", "items"});
  const int version = required<int>(doc, "version", "config");
  if (version != kConfigVersion) {
    throw ConfigError("unsupported config version " + std::to_string(version));
  }

  WorldConfig config;
  const json& map = doc.contains("map") ? doc.at("map") : throw ConfigError("missing 'map' section");
  check_keys(map, "map", {"scent_dimensions", "color_dimensions", "patch_size", "mh_iterations",
                          "scent_decay", "scent_diffusion", "collision_policy", "seed"});
  config.scent_dims = required<int>(map, "scent_dimensions", "map");
  config.color_dims = required<int>(map, "color_dimensions", "map");
  config.patch_size = required<int>(map, "patch_size", "map");
  config.mh_iterations = required<int>(map, "mh_iterations", "map");
  config.scent_decay = required<double>(map, "scent_decay", "map");
  config.scent_diffusion = required<double>(map, "scent_diffusion", "map");
  config.collision_policy =
      parse_policy(optional_value<std::string>(map, "collision_policy", "first-come-first-serve", "map"));
  config.seed = optional_value<std::uint64_t>(map, "seed", 0, "map");

  const json agent = doc.value("agent", json::object());
  check_keys(agent, "agent", {"color", "scent", "action_space", "visual_range", "field_of_view"});
  AgentConfig& a = config.agent_defaults;
  a.color = optional_value(agent, "color", std::vector<double>(config.color_dims, 0.0), "agent");
  a.scent = optional_value(agent, "scent", std::vector<double>(config.scent_dims, 0.0), "agent");
  a.visual_range = optional_value(agent, "visual_range", 8, "agent");
  a.field_of_view = optional_value(agent, "field_of_view", 360.0, "agent");
  if (agent.contains("action_space")) {
    a.action_space.clear();
    for (const auto& name : required<std::vector<std::string>>(agent, "action_space", "agent")) {
      const auto kind = parse_action_kind(name);
      if (!kind) throw ConfigError("unknown action '" + name + "' in agent.action_space");
      if (!a.allows(*kind)) a.action_space.push_back(*kind);
    }
  }

  if (!doc.contains("items") || !doc.at("items").is_array()) throw ConfigError("'items' must be an array");
  const json& items = doc.at("items");
  // Names first, so per-type tables can reference later entries.
  std::vector<std::string> names;
  for (const json& item : items) names.push_back(required<std::string>(item, "name", "item"));
  const std::size_t n = names.size();
  auto index_of = [&](const std::string& name, const std::string& where) -> std::size_t {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown item type '" + name + "' in " + where);
    return static_cast<std::size_t>(it - names.begin());
  };

  for (std::size_t i = 0; i < n; ++i) {
    const json& item = items[i];
    const std::string where = "item '" + names[i] + "'";
    check_keys(item, where, {"name", "scent", "color", "occlusion", "blocks_movement", "intensity",
                             "interactions", "collect_requirements", "collect_costs"});
    ItemType t;
    t.name = names[i];
    t.scent = required<std::vector<double>>(item, "scent", where);
    t.color = required<std::vector<double>>(item, "color", where);
    t.occlusion = optional_value(item, "occlusion", 0.0, where);
    t.blocks_movement = optional_value(item, "blocks_movement", false, where);
    try {
      t.intensity = parse_intensity(optional_value<std::string>(item, "intensity", "Zero", where));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("intensity of " + where + ": " + e.what());
    }
    t.interactions.assign(n, ZeroInteraction{});
    t.collect_requirements.assign(n, 0);
    t.collect_costs.assign(n, 0);
    const json interactions = item.value("interactions", json::object());
    for (const auto& [other, spec] : interactions.items()) {
      const std::size_t j = index_of(other, where + " interactions");
      try {
        t.interactions[j] = parse_interaction(spec.get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError("interaction " + names[i] + "/" + other + ": " + e.what());
      }
    }
    for (const char* key : {"collect_requirements", "collect_costs"}) {
      auto& table = std::string_view(key) == "collect_requirements" ? t.collect_requirements : t.collect_costs;
      const json counts = item.value(key, json::object());
      for (const auto& [other, count] : counts.items()) {
        const std::size_t j = index_of(other, where + " " + key);
        if (!count.is_number_unsigned()) throw ConfigError(std::string(key) + " counts must be non-negative integers");
        table[j] = count.get<std::uint32_t>();
      }
    }
    config.item_types.push_back(std::move(t));
  }

  config.validate();
  return config;
}

json config_to_json(const WorldConfig& config) {
  json doc;
  doc["version"] = kConfigVersion;
  doc["map"] = {
      {"scent_dimensions", config.scent_dims},
      {"color_dimensions", config.color_dims},
      {"patch_size", config.patch_size},
      {"mh_iterations", config.mh_iterations},
      {"scent_decay", config.scent_decay},
      {"scent_diffusion", config.scent_diffusion},
      {"collision_policy", std::string(to_string(config.collision_policy))},
      {"seed", config.seed},
  };
  json actions = json::array();
  for (ActionKind k : config.agent_defaults.action_space) actions.push_back(std::string(to_string(k)));
  doc["agent"] = {
      {"color", config.agent_defaults.color},
      {"scent", config.agent_defaults.scent},
      {"action_space", actions},
      {"visual_range", config.agent_defaults.visual_range},
      {"field_of_view", config.agent_defaults.field_of_view},
  };
  json items = json::array();
  for (const ItemType& t : config.item_types) {
    json interactions = json::object();
    json requirements = json::object();
    json costs = json::object();
    for (std::size_t j = 0; j < config.item_types.size(); ++j) {
      const std::string& other = config.item_types[j].name;
      if (!std::holds_alternative<ZeroInteraction>(t.interactions[j])) interactions[other] = to_string(t.interactions[j]);
      if (t.collect_requirements[j] != 0) requirements[other] = t.collect_requirements[j];
      if (t.collect_costs[j] != 0) costs[other] = t.collect_costs[j];
    }
    items.push_back({
        {"name", t.name},
        {"scent", t.scent},
        {"color", t.color},
        {"occlusion", t.occlusion},
        {"blocks_movement", t.blocks_movement},
        {"intensity", to_string(t.intensity)},
        {"interactions", interactions},
        {"collect_requirements", requirements},
        {"collect_costs", costs},
    });
  }
  doc["items"] = items;
  return doc;
}

WorldConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

WorldConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string canonical_config_text(const WorldConfig& config) { return config_to_json(config).dump(); }

}  // namespace jbw
