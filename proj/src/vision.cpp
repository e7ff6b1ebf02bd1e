#include "jbw/vision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace jbw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double half_width(double distance) { return std::asin(std::min(1.0, 0.5 / distance)); }

double interval_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

std::int64_t squared_norm(Position p) { return p.x * p.x + p.y * p.y; }

}  // namespace

Position egocentric_to_world(int range, int row, int col, Direction facing) {
  const Position ahead = forward_vector(facing);
  const Position right = forward_vector(turn_right(facing));
  return ahead * (range - row) + right * (col - range);
}

double arc_overlap(double center_a, double half_a, double center_b, double half_b) {
  const double len_a = 2.0 * half_a;
  const double len_b = 2.0 * half_b;
  if (len_a >= kTwoPi) return std::min(len_b, kTwoPi);
  if (len_b >= kTwoPi) return len_a;
  // Containment is decided on the centre distance so nested arcs give exact lengths.
  double gap = std::fmod(std::abs(center_a - center_b), kTwoPi);
  if (gap > std::numbers::pi) gap = kTwoPi - gap;
  if (gap + half_b <= half_a) return len_b;
  if (gap + half_a <= half_b) return len_a;
  // Put arc a at [0, len_a] and arc b at [s, s + len_b] with s in [0, 2 pi).
  double s = std::fmod((center_b - half_b) - (center_a - half_a), kTwoPi);
  if (s < 0) s += kTwoPi;
  return interval_overlap(0.0, len_a, s, s + len_b) + interval_overlap(0.0, len_a, s - kTwoPi, s - kTwoPi + len_b);
}

double fov_factor(double fov_degrees, Position offset, Direction facing) {
  if (fov_degrees >= 360.0) return 1.0;
  if (offset.x == 0 && offset.y == 0) return 1.0;
  const double dx = static_cast<double>(offset.x);
  const double dy = static_cast<double>(offset.y);
  const double half = half_width(std::hypot(dx, dy));
  const double fov_half = fov_degrees * std::numbers::pi / 360.0;
  return std::min(1.0, arc_overlap(heading_radians(facing), fov_half, std::atan2(dy, dx), half) / (2.0 * half));
}

double occlusion_factor(Position offset, std::span<const Occluder> occluders) {
  if (occluders.empty() || (offset.x == 0 && offset.y == 0)) return 1.0;
  const double dx = static_cast<double>(offset.x);
  const double dy = static_cast<double>(offset.y);
  const double center = std::atan2(dy, dx);
  const double half = half_width(std::hypot(dx, dy));
  double covered = 0.0;
  for (const Occluder& o : occluders) {
    if (o.occlusion == 0.0 || (o.offset.x == 0 && o.offset.y == 0)) continue;
    const double ox = static_cast<double>(o.offset.x);
    const double oy = static_cast<double>(o.offset.y);
    covered += o.occlusion * arc_overlap(std::atan2(oy, ox), half_width(std::hypot(ox, oy)), center, half) / (2.0 * half);
  }
  return std::max(1.0 - covered, 0.0);
}

VisionTensor render_vision(const WorldMap& map, std::span<const VisibleAgent> agents, const Viewer& viewer) {
  const WorldConfig& config = map.config();
  const int range = viewer.visual_range;
  VisionTensor vision(range, config.color_dims);
  const int side = vision.side();

  // Items in the agent's own cell never occlude; everything else with a
  // non-zero occlusion is a candidate for cells farther away than itself.
  struct Candidate {
    Occluder occluder;
    std::int64_t distance2;
  };
  std::vector<Candidate> candidates;
  const Position lo = viewer.position - Position{range, range};
  const Position hi = viewer.position + Position{range, range};
  map.for_each_item(lo, hi, [&](const Item& item) {
    const double o = config.item_types[item.type].occlusion;
    const Position offset = item.position - viewer.position;
    if (o > 0.0 && (offset.x != 0 || offset.y != 0)) candidates.push_back({{offset, o}, squared_norm(offset)});
  });
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.distance2 < b.distance2; });
  std::vector<Occluder> closer;

  std::vector<double> color(static_cast<std::size_t>(config.color_dims));
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const Position offset = egocentric_to_world(range, row, col, viewer.direction);
      const Position cell = viewer.position + offset;
      std::fill(color.begin(), color.end(), 0.0);
      bool any = false;
      if (const Item* item = map.item_at(cell)) {
        const auto& c = config.item_types[item->type].color;
        for (std::size_t i = 0; i < color.size(); ++i) color[i] += c[i];
        any = true;
      }
      for (const VisibleAgent& agent : agents) {
        if (agent.position != cell) continue;
        for (std::size_t i = 0; i < color.size(); ++i) color[i] += agent.color[i];
        any = true;
      }
      if (!any) continue;

      double factor = fov_factor(viewer.field_of_view, offset, viewer.direction);
      if (factor == 0.0) continue;
      if (!candidates.empty()) {
        const std::int64_t d2 = squared_norm(offset);
        closer.clear();
        for (const Candidate& c : candidates) {
          if (c.distance2 >= d2) break;
          closer.push_back(c.occluder);
        }
        factor *= occlusion_factor(offset, closer);
      }
      for (int i = 0; i < config.color_dims; ++i) {
        vision.at(row, col, i) = color[static_cast<std::size_t>(i)] * factor;
      }
    }
  }
  return vision;
}

}  // namespace jbw
