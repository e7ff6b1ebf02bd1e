#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace jbw {

enum class ActionKind : std::uint8_t { MoveForward, TurnLeft, TurnRight, Collect, Drop, NoOp };

inline constexpr ActionKind kAllActionKinds[] = {ActionKind::MoveForward, ActionKind::TurnLeft,
                                                 ActionKind::TurnRight,   ActionKind::Collect,
                                                 ActionKind::Drop,        ActionKind::NoOp};

struct Action {
  ActionKind kind{ActionKind::NoOp};
  std::uint32_t item{0};  // item type for Drop; ignored otherwise

  friend bool operator==(const Action&, const Action&) = default;
};

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view text);

}  // namespace jbw
