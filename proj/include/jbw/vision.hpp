#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jbw/geometry.hpp"
#include "jbw/world_map.hpp"

namespace jbw {

/// Egocentric (2R+1) x (2R+1) x color_dims view. Row 0 is the farthest row
/// ahead of the agent, column 0 the leftmost; the agent sits at (R, R) facing up.
struct VisionTensor {
  int range{0};
  int dims{0};
  std::vector<double> data;

  VisionTensor() = default;
  VisionTensor(int range_, int dims_)
      : range(range_), dims(dims_), data(static_cast<std::size_t>(side() * side() * dims_), 0.0) {}

  int side() const { return 2 * range + 1; }
  double& at(int row, int col, int channel) {
    return data[static_cast<std::size_t>((row * side() + col) * dims + channel)];
  }
  double at(int row, int col, int channel) const {
    return data[static_cast<std::size_t>((row * side() + col) * dims + channel)];
  }
  std::span<const double> cell(int row, int col) const {
    return {data.data() + static_cast<std::size_t>((row * side() + col) * dims), static_cast<std::size_t>(dims)};
  }

  friend bool operator==(const VisionTensor&, const VisionTensor&) = default;
};

/// World offset of the cell shown at (row, col) for an agent facing `facing`.
Position egocentric_to_world(int range, int row, int col, Direction facing);

/// Fraction of the cell's projected arc that falls inside the field-of-view arc
/// centred on `facing`. The cell at offset (0, 0) is fully visible.
double fov_factor(double fov_degrees, Position offset, Direction facing);

struct Occluder {
  Position offset;
  double occlusion{0};
};

/// max{1 - sum_i o_i |theta_i ∩ theta| / |theta|, 0} over the given occluders,
/// where theta is the projected arc of the cell at `offset`.
double occlusion_factor(Position offset, std::span<const Occluder> occluders);

/// Length of the intersection of two arcs given by centre angle and half width.
double arc_overlap(double center_a, double half_a, double center_b, double half_b);

struct Viewer {
  Position position;
  Direction direction{Direction::Up};
  int visual_range{8};
  double field_of_view{360.0};
};

struct VisibleAgent {
  Position position;
  std::span<const double> color;
};

/// Colour of each visible cell: the sum of item and agent colours there,
/// attenuated by the field of view and by occluding items strictly closer to
/// the viewer than the cell. Agents do not occlude.
VisionTensor render_vision(const WorldMap& map, std::span<const VisibleAgent> agents, const Viewer& viewer);

}  // namespace jbw
