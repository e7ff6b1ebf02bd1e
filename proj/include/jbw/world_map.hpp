#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "jbw/config.hpp"
#include "jbw/geometry.hpp"
#include "jbw/rng.hpp"

namespace jbw {

struct Item {
  Position position;
  std::uint32_t type{0};
  std::int64_t created_at{0};

  friend bool operator==(const Item&, const Item&) = default;
};

enum class PatchStatus : std::uint8_t { Speculative = 0, Fixed = 1 };

/// A P x P tile of the map. Holds at most one item per cell.
class Patch {
 public:
  Patch(Position coord, int patch_size, PatchStatus status = PatchStatus::Speculative);

  Position coord() const { return coord_; }
  PatchStatus status() const { return status_; }
  void set_status(PatchStatus status) { status_ = status; }
  int size() const { return size_; }

  /// Absolute position of the patch's lower-left cell.
  Position origin() const { return coord_ * size_; }
  bool contains(Position cell) const;

  const std::vector<Item>& items() const { return items_; }
  const Item* item_at(Position cell) const;

  /// Inserts `item` if its cell lies in the patch and is empty.
  bool add(const Item& item);
  std::optional<Item> remove_at(Position cell);
  void replace_items(std::vector<Item> items);

 private:
  std::size_t cell_index(Position cell) const;

  Position coord_;
  int size_;
  PatchStatus status_;
  std::vector<Item> items_;
  std::vector<std::int32_t> cells_;  // per-cell index into items_, -1 when empty
};

/// log p(items | context) up to a constant: the intensity of every item plus
/// the interaction of every ordered pair (i, j), i != j, with i drawn from
/// `items` and j from items and context. Pairs farther apart than the patch
/// size (Chebyshev) contribute nothing.
double log_density(std::span<const Item> items, std::span<const Item> context, const WorldConfig& config);

/// Metropolis-Hastings sampler over the items of one patch with fixed context.
///
/// Each step proposes, with probability 1/2 each, either adding an item
/// uniform over the P^2 |T| (cell, type) pairs or removing one of the m current
/// items uniformly, and accepts with min(1, exp(delta) q_reverse / q_forward).
/// An add proposal targeting an occupied cell is rejected.
class PatchSampler {
 public:
  PatchSampler(const WorldConfig& config, Position patch_coord, std::span<const Item> initial,
               std::span<const Item> context);

  void step(Pcg32& rng);
  void run(int iterations, Pcg32& rng) {
    for (int i = 0; i < iterations; ++i) step(rng);
  }

  /// Items currently in the patch, in insertion order (removals swap with the last).
  const std::vector<Item>& items() const { return items_; }

  /// log_density change from adding an item of `type` at `cell` (cell empty).
  double add_delta(Position cell, std::uint32_t type) const;
  /// log_density change from removing items()[index].
  double remove_delta(std::size_t index) const;

 private:
  struct Partner {
    std::uint32_t type;
    std::int64_t reach;     // max of the two directions
    std::int64_t forward;   // reach of g(query, partner), -1 when zero
    std::int64_t backward;  // reach of g(partner, query), -1 when zero
  };

  double pair_sum(Position cell, std::uint32_t type) const;
  std::size_t local_index(Position cell) const;
  std::size_t bucket_of(Position cell) const;
  void bucket_insert(const Item& item);
  void bucket_erase(const Item& item);

  static constexpr std::int64_t kBucket = 8;

  const WorldConfig& config_;
  Position origin_;
  int size_;
  std::uint32_t type_count_;
  std::vector<Item> items_;
  std::vector<std::int32_t> cells_;
  mutable std::vector<double> intensity_cache_;  // per (cell, type); NaN until computed
  std::vector<std::vector<Partner>> partners_;   // per query type
  std::int64_t max_reach_;
  // Spatial buckets over the patch widened by max_reach_, per item type.
  Position region_lo_;
  std::int64_t buckets_per_side_{0};
  std::vector<std::vector<Position>> patch_buckets_;
  std::vector<std::vector<Position>> context_buckets_;
};

/// The infinite map: a sparse collection of patches, each fixed or speculative.
class WorldMap {
 public:
  explicit WorldMap(std::shared_ptr<const WorldConfig> config);

  const WorldConfig& config() const { return *config_; }
  int patch_size() const { return config_->patch_size; }

  Position patch_of(Position cell) const {
    return {floor_div(cell.x, patch_size()), floor_div(cell.y, patch_size())};
  }

  const Patch* find(Position patch_coord) const;
  bool is_fixed(Position patch_coord) const;
  const std::map<Position, Patch>& patches() const { return patches_; }
  /// Fixed patches in the order they were fixed.
  const std::vector<Position>& fixed_order() const { return fixed_order_; }

  /// Generates (or regenerates, if speculative) the patch at `patch_coord` and
  /// fixes it. Missing neighbours are created and sampled as speculative.
  void generate_patch(Position patch_coord, Pcg32& rng);

  /// Fixes every patch intersecting the Chebyshev ball of `radius` around `cell`.
  /// Returns the number of patches newly fixed.
  int ensure_generated(Position cell, std::int64_t radius, Pcg32& rng);

  /// True when every patch intersecting the Chebyshev ball is fixed.
  bool is_generated(Position cell, std::int64_t radius) const;

  const Item* item_at(Position cell) const;
  std::optional<Item> remove_item(Position cell);
  bool place_item(const Item& item);

  /// Visits every item in fixed patches whose cell lies in [lo, hi] (inclusive).
  void for_each_item(Position lo, Position hi, const std::function<void(const Item&)>& fn) const;

  std::size_t item_count() const;

  /// Rebuilds a map from serialized parts (see persistence).
  void restore(std::vector<Patch> patches, std::vector<Position> fixed_order);

 private:
  std::vector<Item> context_for(Position patch_coord) const;
  std::vector<Item> copy_initialization(Position patch_coord, Pcg32& rng) const;
  void sample(Patch& patch, Pcg32& rng) const;

  std::shared_ptr<const WorldConfig> config_;
  std::map<Position, Patch> patches_;
  std::vector<Position> fixed_order_;
};

}  // namespace jbw
