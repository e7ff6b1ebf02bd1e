#pragma once

// Reference implementations shared by the unit tests and the acceptance run.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "jbw/config.hpp"
#include "jbw/functions.hpp"
#include "jbw/reward.hpp"
#include "jbw/rng.hpp"
#include "jbw/world_map.hpp"

namespace jbw::test {

// Point-process log weight written out directly: intensities plus every ordered pair i != j.
inline double oracle_log_weight(const std::vector<Item>& items, const WorldConfig& c) {
  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    total += eval_intensity(c.item_types[items[i].type].intensity, items[i].position);
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (i != j) total += eval_interaction(c.interaction(items[i].type, items[j].type), items[i].position, items[j].position);
    }
  }
  return total;
}

// Configuration code: base-(types+1) digit per cell, 0 = empty.
inline std::uint64_t encode(const std::vector<Item>& items, int side, int types) {
  std::vector<int> cell(static_cast<std::size_t>(side * side), 0);
  for (const Item& it : items) cell[static_cast<std::size_t>(it.position.y * side + it.position.x)] = static_cast<int>(it.type) + 1;
  std::uint64_t code = 0;
  for (int i = side * side - 1; i >= 0; --i) code = code * static_cast<std::uint64_t>(types + 1) + static_cast<std::uint64_t>(cell[static_cast<std::size_t>(i)]);
  return code;
}

inline std::vector<Item> decode(std::uint64_t code, int side, int types) {
  std::vector<Item> items;
  for (int i = 0; i < side * side; ++i) {
    const auto digit = static_cast<int>(code % static_cast<std::uint64_t>(types + 1));
    code /= static_cast<std::uint64_t>(types + 1);
    if (digit > 0) items.push_back({{i % side, i / side}, static_cast<std::uint32_t>(digit - 1), 0});
  }
  return items;
}

inline double mh_total_variation(const WorldConfig& c, int samples, int burn_in, int thin, std::uint64_t seed) {
  const int side = c.patch_size;
  const int types = static_cast<int>(c.item_types.size());
  std::uint64_t states = 1;
  for (int i = 0; i < side * side; ++i) states *= static_cast<std::uint64_t>(types + 1);

  std::vector<double> exact(states);
  double z = 0.0;
  for (std::uint64_t s = 0; s < states; ++s) {
    exact[s] = std::exp(oracle_log_weight(decode(s, side, types), c));
    z += exact[s];
  }
  for (double& p : exact) p /= z;

  PatchSampler sampler(c, {0, 0}, {}, {});
  Pcg32 rng(seed);
  sampler.run(burn_in, rng);
  std::vector<double> counts(states, 0.0);
  for (int i = 0; i < samples; ++i) {
    sampler.run(thin, rng);
    counts[encode(sampler.items(), side, types)] += 1.0;
  }
  double tv = 0.0;
  for (std::uint64_t s = 0; s < states; ++s) tv += std::abs(counts[s] / samples - exact[s]);
  return tv / 2;
}

// Literal iteration of the scent recurrence on a bounded grid centred on the
// origin, one channel.
class DenseScent {
 public:
  DenseScent(int half, double lambda, double alpha)
      : half_(half), side_(2 * half + 1), lambda_(lambda), alpha_(alpha), cur_(side_ * side_, 0.0), next_(cur_) {}

  // emit(x, y) adds C^t at cell (x, y) for the step being computed.
  template <typename Emit>
  void step(Emit emit) {
    for (int y = 0; y < side_; ++y) {
      for (int x = 0; x < side_; ++x) {
        double nb = 0.0;
        if (x > 0) nb += cur_[idx(x - 1, y)];
        if (x + 1 < side_) nb += cur_[idx(x + 1, y)];
        if (y > 0) nb += cur_[idx(x, y - 1)];
        if (y + 1 < side_) nb += cur_[idx(x, y + 1)];
        next_[idx(x, y)] = lambda_ * cur_[idx(x, y)] + alpha_ * nb;
      }
    }
    emit([&](Position p, double v) { next_[idx(static_cast<int>(p.x) + half_, static_cast<int>(p.y) + half_)] += v; });
    cur_.swap(next_);
  }

  double at(Position p) const { return cur_[idx(static_cast<int>(p.x) + half_, static_cast<int>(p.y) + half_)]; }

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y * side_ + x); }
  int half_, side_;
  double lambda_, alpha_;
  std::vector<double> cur_, next_;
};

inline std::string random_space(Pcg32& rng) {
  static const char* kSpaces[] = {"", "", "", " ", "  ", "\t"};
  return kSpaces[rng.uniform_int(6)];
}

inline std::string random_number(Pcg32& rng) {
  switch (rng.uniform_int(4)) {
    case 0:
      return std::to_string(static_cast<int>(rng.uniform_int(21)) - 10);
    case 1:
      return format_number((static_cast<double>(rng.uniform_int(2001)) - 1000.0) / 8.0);
    case 2:
      return "+" + std::to_string(rng.uniform_int(5));
    default:
      return format_number(rng.uniform_real() * 1e-3);
  }
}

inline std::string random_term(Pcg32& rng, const WorldConfig& config) {
  const std::string s = random_space(rng);
  const std::string& item = config.item_types[rng.uniform_int(static_cast<std::uint32_t>(config.item_types.size()))].name;
  switch (rng.uniform_int(6)) {
    case 0:
      return s + "Action";
    case 1:
      return s + "Action[" + s + random_number(rng) + "]";
    case 2:
      return s + "Explore" + (rng.uniform_int(2) ? "[" + random_number(rng) + s + "]" : "");
    case 3:
      return s + "Collect[" + item + s + "]";
    case 4:
      return s + "Collect[" + item + "," + s + random_number(rng) + "]";
    default:
      return s + "Avoid [" + s + item + (rng.uniform_int(2) ? "," + random_number(rng) : "") + "]" + s;
  }
}

/// A random reward expression of one to four terms.
inline std::string random_reward_text(Pcg32& rng, const WorldConfig& config) {
  std::string text = random_term(rng, config);
  const int extra = static_cast<int>(rng.uniform_int(4));
  for (int k = 0; k < extra; ++k) text += "&" + random_term(rng, config);
  return text;
}

}  // namespace jbw::test
