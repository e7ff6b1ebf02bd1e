#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>

namespace jbw {

/// Integer grid position. x grows to the east, y grows to the north.
struct Position {
  std::int64_t x{0};
  std::int64_t y{0};

  friend constexpr bool operator==(const Position&, const Position&) = default;
  friend constexpr auto operator<=>(const Position& a, const Position& b) {
    // Row-major (y, then x) so ordered containers iterate like a raster scan.
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
  friend constexpr Position operator+(Position a, Position b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Position operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Position operator*(Position a, std::int64_t k) { return {a.x * k, a.y * k}; }
};

constexpr std::int64_t chebyshev(Position a, Position b) {
  const std::int64_t dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const std::int64_t dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx > dy ? dx : dy;
}

constexpr std::int64_t manhattan(Position a, Position b) {
  const std::int64_t dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const std::int64_t dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx + dy;
}

/// Floor division (rounds toward negative infinity).
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

enum class Direction : std::uint8_t { Up = 0, Right = 1, Down = 2, Left = 3 };

constexpr Direction turn_left(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 3) % 4);
}
constexpr Direction turn_right(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 1) % 4);
}

/// Unit step taken by MoveForward while facing `d`.
constexpr Position forward_vector(Direction d) {
  switch (d) {
    case Direction::Up: return {0, 1};
    case Direction::Right: return {1, 0};
    case Direction::Down: return {0, -1};
    case Direction::Left: return {-1, 0};
  }
  return {0, 0};
}

/// Heading in radians, counter-clockwise from east.
double heading_radians(Direction d);

std::string_view to_string(Direction d);
bool parse_direction(std::string_view text, Direction& out);

struct PositionHash {
  std::size_t operator()(const Position& p) const noexcept {
    const auto h1 = std::hash<std::int64_t>{}(p.x);
    const auto h2 = std::hash<std::int64_t>{}(p.y);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};

}  // namespace jbw
