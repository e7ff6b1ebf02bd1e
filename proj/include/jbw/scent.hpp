#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jbw/diffusion.hpp"
#include "jbw/geometry.hpp"
#include "jbw/world_map.hpp"

namespace jbw {

/// A scent emitter that appeared at `start` and, once `end` is set, vanished
/// at `end`. It contributes to C^t for start <= t < end. This is the paired
/// form of the +1 (created/dropped) and -1 (collected/destroyed) events.
struct ScentSource {
  Position position;
  std::vector<double> scent;
  std::int64_t start{0};
  std::optional<std::int64_t> end;

  friend bool operator==(const ScentSource&, const ScentSource&) = default;
};

/// Raised when a scent query reads cells whose neighbourhood is not generated.
class UngeneratedRegion : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scent at `position` and `time`: every item in a fixed patch (present since
/// its created_at) plus every entry of `sources`, each convolved with the
/// kernel. Throws UngeneratedRegion unless every patch within the kernel
/// radius is fixed.
std::vector<double> scent_at(const WorldMap& map, std::span<const ScentSource> sources, Position position,
                             std::int64_t time, const DiffusionKernel& kernel);

/// Same sum without the generation check; cells near the generated frontier
/// under-count scent from items that do not exist yet.
std::vector<double> scent_at_unchecked(const WorldMap& map, std::span<const ScentSource> sources,
                                       Position position, std::int64_t time, const DiffusionKernel& kernel);

/// Drops retired sources whose contribution is identically zero from `time`
/// onwards (both endpoints are past the kernel's transient). Returns the
/// number removed.
std::size_t compact_scent_sources(std::vector<ScentSource>& sources, std::int64_t time,
                                  const DiffusionKernel& kernel);

}  // namespace jbw
