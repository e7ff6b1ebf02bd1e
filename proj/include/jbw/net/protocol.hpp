#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "jbw/action.hpp"
#include "jbw/config.hpp"
#include "jbw/geometry.hpp"
#include "jbw/vision.hpp"

namespace jbw::net {

inline constexpr int kProtocolVersion = 1;

/// {v, id, type, body}. Server broadcasts use id 0.
struct Message {
  int v{kProtocolVersion};
  std::uint64_t id{0};
  std::string type;
  nlohmann::json body = nlohmann::json::object();

  friend bool operator==(const Message&, const Message&) = default;
};

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// One line of compact JSON without the trailing newline.
std::string encode(const Message& message);
/// Unknown envelope fields are ignored. Throws ProtocolError("malformed", ...).
Message decode(std::string_view frame);

Message error_message(std::uint64_t id, std::string_view code, std::string_view text);

nlohmann::json position_json(Position p);
Position position_from_json(const nlohmann::json& j);

/// {"kind": "MoveForward"} or {"kind": "Drop", "item": "Banana"}.
nlohmann::json action_json(const Action& action, const WorldConfig& config);
Action action_from_json(const nlohmann::json& j, const WorldConfig& config);

/// {"rows", "cols", "channels", "data"}; data is row-major, row 0 farthest ahead.
nlohmann::json vision_json(const VisionTensor& vision);

std::string hex64(std::uint64_t value);

}  // namespace jbw::net
