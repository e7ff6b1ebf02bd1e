#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "jbw/action.hpp"
#include "jbw/rng.hpp"
#include "jbw/vision.hpp"

namespace jbw {

/// True when `color` is gamma * `direction` for some gamma > 1e-6, within a
/// relative tolerance of 1e-6.
bool color_on_ray(std::span<const double> color, std::span<const double> direction);

struct GreedyTargets {
  std::vector<double> reward;    // c_r
  std::vector<std::vector<double>> obstacles;  // c_w, one per blocking item type
  std::optional<std::vector<double>> avoid;  // c_o
};

/// Dijkstra over (cell, direction) states of the egocentric tensor with unit
/// action costs. Cells on the obstacle or avoid rays, and cells outside the
/// field of view, are untraversable. Returns the actions of a shortest path
/// ending on a reward-coloured cell, or nullopt when none is reachable.
std::optional<std::vector<Action>> shortest_path(const VisionTensor& vision, const GreedyTargets& targets,
                                                 double field_of_view = 360.0);

/// The greedy vision-based policy, following the original rule literally.
/// With `forward_when_clear`, the idle rule is inverted: move forward unless
/// an obstacle is ahead, otherwise turn at random.
class GreedyAgent {
 public:
  GreedyAgent(GreedyTargets targets, double field_of_view, std::uint64_t seed, bool forward_when_clear = false);

  Action act(const VisionTensor& vision);
  const std::optional<std::deque<Action>>& best_path() const { return best_path_; }

 private:
  GreedyTargets targets_;
  double field_of_view_;
  bool forward_when_clear_;
  Pcg32 rng_;
  std::optional<std::deque<Action>> best_path_;
};

/// Uniform over `action_space`. Drop picks its item uniformly among `item_types`.
Action random_policy(std::span<const ActionKind> action_space, Pcg32& rng, std::uint32_t item_types = 1);

}  // namespace jbw
