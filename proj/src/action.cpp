#include "jbw/action.hpp"

namespace jbw {

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::MoveForward: return "MoveForward";
    case ActionKind::TurnLeft: return "TurnLeft";
    case ActionKind::TurnRight: return "TurnRight";
    case ActionKind::Collect: return "Collect";
    case ActionKind::Drop: return "Drop";
    case ActionKind::NoOp: return "NoOp";
  }
  return "?";
}

std::optional<ActionKind> parse_action_kind(std::string_view text) {
  for (ActionKind kind : kAllActionKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

}  // namespace jbw
