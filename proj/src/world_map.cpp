#include "jbw/world_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jbw {

// ---------------------------------------------------------------------------
// Patch

Patch::Patch(Position coord, int patch_size, PatchStatus status)
    : coord_(coord),
      size_(patch_size),
      status_(status),
      cells_(static_cast<std::size_t>(patch_size) * static_cast<std::size_t>(patch_size), -1) {}

bool Patch::contains(Position cell) const {
  const Position o = origin();
  return cell.x >= o.x && cell.x < o.x + size_ && cell.y >= o.y && cell.y < o.y + size_;
}

std::size_t Patch::cell_index(Position cell) const {
  const Position o = origin();
  return static_cast<std::size_t>((cell.y - o.y) * size_ + (cell.x - o.x));
}

const Item* Patch::item_at(Position cell) const {
  if (!contains(cell)) return nullptr;
  const std::int32_t i = cells_[cell_index(cell)];
  return i < 0 ? nullptr : &items_[static_cast<std::size_t>(i)];
}

bool Patch::add(const Item& item) {
  if (!contains(item.position)) return false;
  std::int32_t& slot = cells_[cell_index(item.position)];
  if (slot >= 0) return false;
  slot = static_cast<std::int32_t>(items_.size());
  items_.push_back(item);
  return true;
}

std::optional<Item> Patch::remove_at(Position cell) {
  if (!contains(cell)) return std::nullopt;
  std::int32_t& slot = cells_[cell_index(cell)];
  if (slot < 0) return std::nullopt;
  const auto index = static_cast<std::size_t>(slot);
  const Item removed = items_[index];
  slot = -1;
  if (index + 1 != items_.size()) {
    items_[index] = items_.back();
    cells_[cell_index(items_[index].position)] = static_cast<std::int32_t>(index);
  }
  items_.pop_back();
  return removed;
}

void Patch::replace_items(std::vector<Item> items) {
  std::fill(cells_.begin(), cells_.end(), -1);
  items_.clear();
  items_.reserve(items.size());
  for (const Item& item : items) {
    if (!add(item)) throw std::logic_error("patch items overlap or fall outside the patch");
  }
}

// ---------------------------------------------------------------------------
// Density

double log_density(std::span<const Item> items, std::span<const Item> context, const WorldConfig& config) {
  const std::int64_t range = config.patch_size;
  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& a = items[i];
    total += eval_intensity(config.item_types[a.type].intensity, a.position);
    auto pair = [&](const Item& b) {
      if (chebyshev(a.position, b.position) > range) return;
      total += eval_interaction(config.interaction(a.type, b.type), a.position, b.position);
    };
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (j != i) pair(items[j]);
    }
    for (const Item& b : context) pair(b);
  }
  return total;
}

// ---------------------------------------------------------------------------
// PatchSampler

PatchSampler::PatchSampler(const WorldConfig& config, Position patch_coord, std::span<const Item> initial,
                           std::span<const Item> context)
    : config_(config),
      origin_(patch_coord * config.patch_size),
      size_(config.patch_size),
      type_count_(static_cast<std::uint32_t>(config.item_types.size())),
      cells_(static_cast<std::size_t>(size_) * static_cast<std::size_t>(size_), -1),
      intensity_cache_(cells_.size() * type_count_, std::numeric_limits<double>::quiet_NaN()),
      partners_(type_count_),
      max_reach_(-1) {
  // Pairs farther apart than the patch size never interact.
  const auto reach = [&](std::uint32_t a, std::uint32_t b) -> std::int64_t {
    const auto r = interaction_reach(config.interaction(a, b));
    return r ? std::min<std::int64_t>(*r, size_) : -1;
  };
  for (std::uint32_t t = 0; t < type_count_; ++t) {
    for (std::uint32_t u = 0; u < type_count_; ++u) {
      const std::int64_t f = reach(t, u);
      const std::int64_t b = reach(u, t);
      if (f < 0 && b < 0) continue;
      partners_[t].push_back({u, std::max(f, b), f, b});
      max_reach_ = std::max({max_reach_, f, b});
    }
  }
  const std::int64_t margin = std::max<std::int64_t>(max_reach_, 0);
  region_lo_ = {origin_.x - margin, origin_.y - margin};
  buckets_per_side_ = (size_ + 2 * margin + kBucket - 1) / kBucket;
  const auto bucket_count = static_cast<std::size_t>(buckets_per_side_ * buckets_per_side_) * type_count_;
  patch_buckets_.resize(bucket_count);
  context_buckets_.resize(bucket_count);

  for (const Item& item : initial) {
    std::int32_t& slot = cells_[local_index(item.position)];
    if (slot >= 0) throw std::logic_error("initial patch items overlap");
    slot = static_cast<std::int32_t>(items_.size());
    items_.push_back(item);
    bucket_insert(item);
  }
  // Context beyond the interaction reach of every cell can never contribute.
  if (max_reach_ < 0) return;
  const Position hi{origin_.x + size_ - 1 + margin, origin_.y + size_ - 1 + margin};
  for (const Item& item : context) {
    const Position p = item.position;
    if (p.x < region_lo_.x || p.x > hi.x || p.y < region_lo_.y || p.y > hi.y) continue;
    if (partners_[item.type].empty()) continue;
    context_buckets_[bucket_of(p) * type_count_ + item.type].push_back(p);
  }
}

std::size_t PatchSampler::local_index(Position cell) const {
  const std::int64_t lx = cell.x - origin_.x;
  const std::int64_t ly = cell.y - origin_.y;
  if (lx < 0 || ly < 0 || lx >= size_ || ly >= size_) throw std::logic_error("cell outside sampled patch");
  return static_cast<std::size_t>(ly * size_ + lx);
}

std::size_t PatchSampler::bucket_of(Position cell) const {
  const std::int64_t bx = (cell.x - region_lo_.x) / kBucket;
  const std::int64_t by = (cell.y - region_lo_.y) / kBucket;
  return static_cast<std::size_t>(by * buckets_per_side_ + bx);
}

void PatchSampler::bucket_insert(const Item& item) {
  if (partners_[item.type].empty()) return;
  patch_buckets_[bucket_of(item.position) * type_count_ + item.type].push_back(item.position);
}

void PatchSampler::bucket_erase(const Item& item) {
  if (partners_[item.type].empty()) return;
  auto& bucket = patch_buckets_[bucket_of(item.position) * type_count_ + item.type];
  for (std::size_t i = 0; i < bucket.size(); ++i) {
    if (bucket[i] == item.position) {
      bucket[i] = bucket.back();
      bucket.pop_back();
      return;
    }
  }
}

double PatchSampler::pair_sum(Position cell, std::uint32_t type) const {
  double total = 0.0;
  const std::int64_t last = buckets_per_side_ - 1;
  for (const Partner& partner : partners_[type]) {
    const InteractionFn& forward = config_.interaction(type, partner.type);
    const InteractionFn& backward = config_.interaction(partner.type, type);
    const std::int64_t r = partner.reach;
    const std::int64_t bx0 = std::max<std::int64_t>(0, (cell.x - r - region_lo_.x) / kBucket);
    const std::int64_t by0 = std::max<std::int64_t>(0, (cell.y - r - region_lo_.y) / kBucket);
    const std::int64_t bx1 = std::min(last, (cell.x + r - region_lo_.x) / kBucket);
    const std::int64_t by1 = std::min(last, (cell.y + r - region_lo_.y) / kBucket);
    for (std::int64_t by = by0; by <= by1; ++by) {
      for (std::int64_t bx = bx0; bx <= bx1; ++bx) {
        const std::size_t b = static_cast<std::size_t>(by * buckets_per_side_ + bx) * type_count_ + partner.type;
        for (const Position p : patch_buckets_[b]) {
          if (p == cell) continue;
          const std::int64_t d = chebyshev(cell, p);
          if (d <= partner.forward) total += eval_interaction(forward, cell, p);
          if (d <= partner.backward) total += eval_interaction(backward, p, cell);
        }
        for (const Position p : context_buckets_[b]) {
          if (chebyshev(cell, p) <= partner.forward) total += eval_interaction(forward, cell, p);
        }
      }
    }
  }
  return total;
}

double PatchSampler::add_delta(Position cell, std::uint32_t type) const {
  double& cached = intensity_cache_[local_index(cell) * type_count_ + type];
  if (std::isnan(cached)) cached = eval_intensity(config_.item_types[type].intensity, cell);
  return cached + pair_sum(cell, type);
}

double PatchSampler::remove_delta(std::size_t index) const {
  const Item& item = items_[index];
  double& cached = intensity_cache_[local_index(item.position) * type_count_ + item.type];
  if (std::isnan(cached)) cached = eval_intensity(config_.item_types[item.type].intensity, item.position);
  return -(cached + pair_sum(item.position, item.type));
}

void PatchSampler::step(Pcg32& rng) {
  const double cell_type_count = static_cast<double>(size_) * size_ * type_count_;
  const std::size_t m = items_.size();
  if (rng.uniform_int(2) == 0) {
    const std::uint32_t cell_index = rng.uniform_int(static_cast<std::uint32_t>(size_ * size_));
    const std::uint32_t type = rng.uniform_int(type_count_);
    if (cells_[cell_index] >= 0) return;
    const Position cell{origin_.x + cell_index % size_, origin_.y + cell_index / size_};
    // q(add this item) = 1 / (2 P^2 |T|), q(remove it afterwards) = 1 / (2 (m + 1)).
    const double log_ratio =
        add_delta(cell, type) + std::log(cell_type_count) - std::log(static_cast<double>(m + 1));
    if (log_ratio < 0.0 && rng.uniform_real() >= std::exp(log_ratio)) return;
    cells_[cell_index] = static_cast<std::int32_t>(m);
    items_.push_back(Item{cell, type, 0});
    bucket_insert(items_.back());
  } else {
    if (m == 0) return;
    const std::uint32_t index = rng.uniform_int(static_cast<std::uint32_t>(m));
    const double log_ratio =
        remove_delta(index) + std::log(static_cast<double>(m)) - std::log(cell_type_count);
    if (log_ratio < 0.0 && rng.uniform_real() >= std::exp(log_ratio)) return;
    bucket_erase(items_[index]);
    cells_[local_index(items_[index].position)] = -1;
    if (index + 1 != m) {
      items_[index] = items_.back();
      cells_[local_index(items_[index].position)] = static_cast<std::int32_t>(index);
    }
    items_.pop_back();
  }
}

// ---------------------------------------------------------------------------
// WorldMap

WorldMap::WorldMap(std::shared_ptr<const WorldConfig> config) : config_(std::move(config)) {}

const Patch* WorldMap::find(Position patch_coord) const {
  const auto it = patches_.find(patch_coord);
  return it == patches_.end() ? nullptr : &it->second;
}

bool WorldMap::is_fixed(Position patch_coord) const {
  const Patch* p = find(patch_coord);
  return p != nullptr && p->status() == PatchStatus::Fixed;
}

std::vector<Item> WorldMap::context_for(Position patch_coord) const {
  std::vector<Item> context;
  for (std::int64_t dy = -1; dy <= 1; ++dy) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (const Patch* p = find(patch_coord + Position{dx, dy})) {
        context.insert(context.end(), p->items().begin(), p->items().end());
      }
    }
  }
  return context;
}

std::vector<Item> WorldMap::copy_initialization(Position patch_coord, Pcg32& rng) const {
  if (fixed_order_.empty()) return {};
  const Position source = fixed_order_[rng.uniform_int(static_cast<std::uint32_t>(fixed_order_.size()))];
  const Position shift = (patch_coord - source) * patch_size();
  std::vector<Item> items;
  const Patch& src = patches_.at(source);
  items.reserve(src.items().size());
  for (const Item& item : src.items()) items.push_back(Item{item.position + shift, item.type, 0});
  return items;
}

void WorldMap::sample(Patch& patch, Pcg32& rng) const {
  const std::vector<Item> context = context_for(patch.coord());
  PatchSampler sampler(*config_, patch.coord(), patch.items(), context);
  sampler.run(config_->mh_iterations, rng);
  patch.replace_items(sampler.items());
}

void WorldMap::generate_patch(Position patch_coord, Pcg32& rng) {
  if (is_fixed(patch_coord)) throw std::logic_error("generate_patch called on a fixed patch");
  const int p = patch_size();

  auto target_it = patches_.find(patch_coord);
  if (target_it == patches_.end()) {
    target_it = patches_.emplace(patch_coord, Patch(patch_coord, p)).first;
  }
  target_it->second.replace_items(copy_initialization(patch_coord, rng));

  for (std::int64_t dy = -1; dy <= 1; ++dy) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      const Position n = patch_coord + Position{dx, dy};
      if ((dx == 0 && dy == 0) || patches_.contains(n)) continue;
      Patch& neighbour = patches_.emplace(n, Patch(n, p)).first->second;
      neighbour.replace_items(copy_initialization(n, rng));
      sample(neighbour, rng);
    }
  }

  Patch& target = target_it->second;
  sample(target, rng);
  target.set_status(PatchStatus::Fixed);
  fixed_order_.push_back(patch_coord);
}

int WorldMap::ensure_generated(Position cell, std::int64_t radius, Pcg32& rng) {
  if (radius < 0) throw std::invalid_argument("radius must be non-negative");
  const Position lo = patch_of(cell - Position{radius, radius});
  const Position hi = patch_of(cell + Position{radius, radius});
  int generated = 0;
  for (std::int64_t y = lo.y; y <= hi.y; ++y) {
    for (std::int64_t x = lo.x; x <= hi.x; ++x) {
      if (!is_fixed({x, y})) {
        generate_patch({x, y}, rng);
        ++generated;
      }
    }
  }
  return generated;
}

bool WorldMap::is_generated(Position cell, std::int64_t radius) const {
  const Position lo = patch_of(cell - Position{radius, radius});
  const Position hi = patch_of(cell + Position{radius, radius});
  for (std::int64_t y = lo.y; y <= hi.y; ++y) {
    for (std::int64_t x = lo.x; x <= hi.x; ++x) {
      if (!is_fixed({x, y})) return false;
    }
  }
  return true;
}

const Item* WorldMap::item_at(Position cell) const {
  const Patch* p = find(patch_of(cell));
  if (p == nullptr || p->status() != PatchStatus::Fixed) return nullptr;
  return p->item_at(cell);
}

std::optional<Item> WorldMap::remove_item(Position cell) {
  const auto it = patches_.find(patch_of(cell));
  if (it == patches_.end() || it->second.status() != PatchStatus::Fixed) return std::nullopt;
  return it->second.remove_at(cell);
}

bool WorldMap::place_item(const Item& item) {
  const auto it = patches_.find(patch_of(item.position));
  if (it == patches_.end() || it->second.status() != PatchStatus::Fixed) return false;
  return it->second.add(item);
}

void WorldMap::for_each_item(Position lo, Position hi, const std::function<void(const Item&)>& fn) const {
  const Position plo = patch_of(lo);
  const Position phi = patch_of(hi);
  for (std::int64_t y = plo.y; y <= phi.y; ++y) {
    for (std::int64_t x = plo.x; x <= phi.x; ++x) {
      const Patch* p = find({x, y});
      if (p == nullptr || p->status() != PatchStatus::Fixed) continue;
      for (const Item& item : p->items()) {
        const Position q = item.position;
        if (q.x >= lo.x && q.x <= hi.x && q.y >= lo.y && q.y <= hi.y) fn(item);
      }
    }
  }
}

std::size_t WorldMap::item_count() const {
  std::size_t n = 0;
  for (const auto& [coord, patch] : patches_) {
    if (patch.status() == PatchStatus::Fixed) n += patch.items().size();
  }
  return n;
}

void WorldMap::restore(std::vector<Patch> patches, std::vector<Position> fixed_order) {
  patches_.clear();
  for (Patch& p : patches) {
    const Position c = p.coord();
    patches_.emplace(c, std::move(p));
  }
  fixed_order_ = std::move(fixed_order);
}

}  // namespace jbw
