#include "jbw/greedy.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace jbw {

namespace {

constexpr double kTolerance = 1e-6;

struct State {
  int row;
  int col;
  Direction dir;
};

// Egocentric frame: the agent faces Up, which is towards row 0.
State forward(State s) {
  switch (s.dir) {
    case Direction::Up:
      return {s.row - 1, s.col, s.dir};
    case Direction::Right:
      return {s.row, s.col + 1, s.dir};
    case Direction::Down:
      return {s.row + 1, s.col, s.dir};
    case Direction::Left:
      return {s.row, s.col - 1, s.dir};
  }
  return s;
}

bool on_any_ray(std::span<const double> color, const std::vector<std::vector<double>>& rays) {
  for (const auto& ray : rays) {
    if (color_on_ray(color, ray)) return true;
  }
  return false;
}

}  // namespace

bool color_on_ray(std::span<const double> color, std::span<const double> direction) {
  double cc = 0.0;
  double cd = 0.0;
  double dd = 0.0;
  for (std::size_t i = 0; i < direction.size(); ++i) {
    cc += color[i] * color[i];
    cd += color[i] * direction[i];
    dd += direction[i] * direction[i];
  }
  if (dd == 0.0) return false;
  const double gamma = cd / dd;
  if (!(gamma > kTolerance)) return false;
  double residual = 0.0;
  for (std::size_t i = 0; i < direction.size(); ++i) {
    const double r = color[i] - gamma * direction[i];
    residual += r * r;
  }
  return std::sqrt(residual) <= kTolerance * std::sqrt(cc);
}

std::optional<std::vector<Action>> shortest_path(const VisionTensor& vision, const GreedyTargets& targets,
                                                 double field_of_view) {
  const int side = vision.side();
  const int range = vision.range;
  const auto cells = static_cast<std::size_t>(side * side);

  std::vector<char> passable(cells, 1);
  std::vector<char> goal(cells, 0);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const auto c = static_cast<std::size_t>(row * side + col);
      const auto color = vision.cell(row, col);
      const bool blocked = on_any_ray(color, targets.obstacles) ||
                           (targets.avoid && color_on_ray(color, *targets.avoid)) ||
                           fov_factor(field_of_view, egocentric_to_world(range, row, col, Direction::Up),
                                      Direction::Up) == 0.0;
      passable[c] = blocked ? 0 : 1;
      goal[c] = !blocked && color_on_ray(color, targets.reward) ? 1 : 0;
    }
  }

  const auto index = [&](State s) {
    return (static_cast<std::size_t>(s.row * side + s.col) << 2) | static_cast<std::size_t>(s.dir);
  };
  constexpr int kUnseen = -1;
  std::vector<int> dist(cells * 4, kUnseen);
  std::vector<std::size_t> parent(cells * 4, 0);
  std::vector<Action> via(cells * 4);

  using Entry = std::tuple<int, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  const State start{range, range, Direction::Up};
  dist[index(start)] = 0;
  frontier.emplace(0, index(start));

  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (d != dist[u]) continue;
    const State s{static_cast<int>((u >> 2) / static_cast<std::size_t>(side)),
                  static_cast<int>((u >> 2) % static_cast<std::size_t>(side)), static_cast<Direction>(u & 3U)};
    if (d > 0 && goal[u >> 2]) {
      std::vector<Action> path(static_cast<std::size_t>(d));
      for (std::size_t v = u; v != index(start); v = parent[v]) path[static_cast<std::size_t>(dist[v] - 1)] = via[v];
      return path;
    }
    const State next[3] = {forward(s), {s.row, s.col, turn_left(s.dir)}, {s.row, s.col, turn_right(s.dir)}};
    const ActionKind kinds[3] = {ActionKind::MoveForward, ActionKind::TurnLeft, ActionKind::TurnRight};
    for (int k = 0; k < 3; ++k) {
      const State n = next[k];
      if (n.row < 0 || n.row >= side || n.col < 0 || n.col >= side) continue;
      if (!passable[static_cast<std::size_t>(n.row * side + n.col)]) continue;
      const std::size_t v = index(n);
      if (dist[v] != kUnseen && dist[v] <= d + 1) continue;
      dist[v] = d + 1;
      parent[v] = u;
      via[v] = Action{kinds[k], 0};
      frontier.emplace(d + 1, v);
    }
  }
  return std::nullopt;
}

GreedyAgent::GreedyAgent(GreedyTargets targets, double field_of_view, std::uint64_t seed, bool forward_when_clear)
    : targets_(std::move(targets)), field_of_view_(field_of_view), forward_when_clear_(forward_when_clear), rng_(seed) {}

Action GreedyAgent::act(const VisionTensor& vision) {
  auto path = shortest_path(vision, targets_, field_of_view_);
  if (!best_path_ || (path && path->size() < best_path_->size())) {
    if (path) {
      best_path_.emplace(path->begin(), path->end());
    } else {
      best_path_.reset();
    }
  }
  if (!best_path_) {
    const bool obstacle_ahead = on_any_ray(vision.cell(vision.range - 1, vision.range), targets_.obstacles);
    if (obstacle_ahead != forward_when_clear_) return {ActionKind::MoveForward, 0};
    return {rng_.uniform_int(2) == 0 ? ActionKind::TurnLeft : ActionKind::TurnRight, 0};
  }
  const Action next = best_path_->front();
  best_path_->pop_front();
  if (best_path_->empty()) best_path_.reset();
  return next;
}

Action random_policy(std::span<const ActionKind> action_space, Pcg32& rng, std::uint32_t item_types) {
  if (action_space.empty()) throw std::invalid_argument("action space is empty");
  const ActionKind kind = action_space[rng.uniform_int(static_cast<std::uint32_t>(action_space.size()))];
  std::uint32_t item = 0;
  if (kind == ActionKind::Drop && item_types > 1) item = rng.uniform_int(item_types);
  return {kind, item};
}

}  // namespace jbw
