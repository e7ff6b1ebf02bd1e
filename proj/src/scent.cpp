#include "jbw/scent.hpp"

#include <algorithm>
#include <string>

namespace jbw {

std::vector<double> scent_at_unchecked(const WorldMap& map, std::span<const ScentSource> sources,
                                       Position position, std::int64_t time, const DiffusionKernel& kernel) {
  const WorldConfig& config = map.config();
  const std::size_t dims = static_cast<std::size_t>(config.scent_dims);
  std::vector<double> scent(dims, 0.0);
  const std::int64_t r = kernel.radius();

  // Per-type weight sums let generated items (all created_at 0) share one
  // multiply per dimension.
  std::vector<double> weight(config.item_types.size(), 0.0);
  const Position plo = map.patch_of(position - Position{r, r});
  const Position phi = map.patch_of(position + Position{r, r});
  for (std::int64_t py = plo.y; py <= phi.y; ++py) {
    for (std::int64_t px = plo.x; px <= phi.x; ++px) {
      const Patch* patch = map.find({px, py});
      if (patch == nullptr || patch->status() != PatchStatus::Fixed) continue;
      for (const Item& item : patch->items()) {
        const std::int64_t dx = item.position.x - position.x;
        const std::int64_t dy = item.position.y - position.y;
        if (std::abs(dx) + std::abs(dy) > r) continue;
        const double* k = kernel.slice(time - item.created_at);
        if (k != nullptr) weight[item.type] += k[DiffusionKernel::offset_index(dx, dy)];
      }
    }
  }
  for (std::size_t t = 0; t < weight.size(); ++t) {
    if (weight[t] == 0.0) continue;
    const std::vector<double>& s = config.item_types[t].scent;
    for (std::size_t i = 0; i < dims; ++i) scent[i] += weight[t] * s[i];
  }

  for (const ScentSource& source : sources) {
    const Position d = source.position - position;
    if (std::abs(d.x) + std::abs(d.y) > r) continue;
    double k = kernel.value(time - source.start, d.x, d.y);
    if (source.end) k -= kernel.value(time - *source.end, d.x, d.y);
    if (k == 0.0) continue;
    for (std::size_t i = 0; i < scent.size(); ++i) scent[i] += k * source.scent[i];
  }
  return scent;
}

std::vector<double> scent_at(const WorldMap& map, std::span<const ScentSource> sources, Position position,
                             std::int64_t time, const DiffusionKernel& kernel) {
  if (!map.is_generated(position, kernel.radius())) {
    throw UngeneratedRegion("scent query at (" + std::to_string(position.x) + ", " + std::to_string(position.y) +
                            ") reads ungenerated patches");
  }
  return scent_at_unchecked(map, sources, position, time, kernel);
}

std::size_t compact_scent_sources(std::vector<ScentSource>& sources, std::int64_t time,
                                  const DiffusionKernel& kernel) {
  const auto retired = [&](const ScentSource& s) { return s.end && time - *s.end > kernel.tau_max(); };
  const auto it = std::remove_if(sources.begin(), sources.end(), retired);
  const auto removed = static_cast<std::size_t>(sources.end() - it);
  sources.erase(it, sources.end());
  return removed;
}

}  // namespace jbw
