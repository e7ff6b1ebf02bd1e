#include "jbw/geometry.hpp"

#include <numbers>

namespace jbw {

double heading_radians(Direction d) {
  switch (d) {
    case Direction::Up: return std::numbers::pi / 2;
    case Direction::Right: return 0.0;
    case Direction::Down: return -std::numbers::pi / 2;
    case Direction::Left: return std::numbers::pi;
  }
  return 0.0;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Right: return "right";
    case Direction::Down: return "down";
    case Direction::Left: return "left";
  }
  return "?";
}

bool parse_direction(std::string_view text, Direction& out) {
  if (text == "up") out = Direction::Up;
  else if (text == "right") out = Direction::Right;
  else if (text == "down") out = Direction::Down;
  else if (text == "left") out = Direction::Left;
  else return false;
  return true;
}

}  // namespace jbw
