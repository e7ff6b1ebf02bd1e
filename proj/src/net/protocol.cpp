#include "jbw/net/protocol.hpp"

#include <cstdio>

namespace jbw::net {

std::string encode(const Message& m) {
  const nlohmann::json j = {{"v", m.v}, {"id", m.id}, {"type", m.type}, {"body", m.body}};
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

Message decode(std::string_view frame) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(frame);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError("malformed", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("malformed", "frame must be a JSON object");
  Message m;
  try {
    m.v = j.at("v").get<int>();
    m.id = j.contains("id") ? j.at("id").get<std::uint64_t>() : 0;
    m.type = j.at("type").get<std::string>();
    if (j.contains("body")) m.body = j.at("body");
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError("malformed", std::string("bad envelope: ") + e.what());
  }
  if (!m.body.is_object()) throw ProtocolError("malformed", "body must be an object");
  if (m.v != kProtocolVersion) throw ProtocolError("version", "unsupported protocol version " + std::to_string(m.v));
  return m;
}

Message error_message(std::uint64_t id, std::string_view code, std::string_view text) {
  return {kProtocolVersion, id, "error", {{"code", code}, {"message", text}}};
}

nlohmann::json position_json(Position p) { return nlohmann::json::array({p.x, p.y}); }

Position position_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ProtocolError("invalid", "position must be [x, y]");
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

nlohmann::json action_json(const Action& action, const WorldConfig& config) {
  nlohmann::json j = {{"kind", to_string(action.kind)}};
  if (action.kind == ActionKind::Drop) j["item"] = config.item_types.at(action.item).name;
  return j;
}

Action action_from_json(const nlohmann::json& j, const WorldConfig& config) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ProtocolError("invalid", "action must be an object with a \"kind\"");
  }
  const auto kind = parse_action_kind(j.at("kind").get<std::string>());
  if (!kind) throw ProtocolError("invalid", "unknown action kind");
  Action a{*kind, 0};
  if (*kind == ActionKind::Drop) {
    if (!j.contains("item") || !j.at("item").is_string()) throw ProtocolError("invalid", "Drop needs an \"item\"");
    const auto item = config.type_index(j.at("item").get<std::string>());
    if (!item) throw ProtocolError("invalid", "unknown item type");
    a.item = *item;
  }
  return a;
}

nlohmann::json vision_json(const VisionTensor& vision) {
  return {{"rows", vision.side()}, {"cols", vision.side()}, {"channels", vision.dims}, {"data", vision.data}};
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace jbw::net
