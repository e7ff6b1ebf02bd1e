#include "jbw/diffusion.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace jbw {

namespace {

/// Dense iteration of the recurrence on [-half, half]^2 with zero outside.
class Grid {
 public:
  explicit Grid(std::int64_t half)
      : half_(half), side_(2 * half + 1), cur_(static_cast<std::size_t>(side_ * side_), 0.0), next_(cur_) {}

  void step(double decay, double diffusion, std::int64_t tau) {
    const std::int64_t reach = std::min(tau, half_);
    for (std::int64_t y = -reach; y <= reach; ++y) {
      for (std::int64_t x = -reach; x <= reach; ++x) {
        double v = decay * at(x, y);
        v += diffusion * (at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1));
        if (x == 0 && y == 0) v += 1.0;
        next_[index(x, y)] = v;
      }
    }
    cur_.swap(next_);
  }

  double at(std::int64_t x, std::int64_t y) const {
    if (std::abs(x) > half_ || std::abs(y) > half_) return 0.0;
    return cur_[index(x, y)];
  }

 private:
  std::size_t index(std::int64_t x, std::int64_t y) const {
    return static_cast<std::size_t>((y + half_) * side_ + (x + half_));
  }

  std::int64_t half_;
  std::int64_t side_;
  std::vector<double> cur_;
  std::vector<double> next_;
};

std::int64_t first_tau_below(double rho, double threshold) {
  if (rho == 0.0) return 0;
  std::int64_t tau = 0;
  double tail = rho / (1.0 - rho);  // rho^(tau+1) / (1 - rho)
  while (tail >= threshold) {
    tail *= rho;
    ++tau;
  }
  return tau;
}

}  // namespace

DiffusionKernel::DiffusionKernel(double decay, double diffusion, double epsilon)
    : decay_(decay), diffusion_(diffusion), epsilon_(epsilon) {
  const double rho = decay + 4.0 * diffusion;
  if (!(decay >= 0.0 && diffusion >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("diffusion kernel requires decay, diffusion >= 0 and decay + 4 diffusion < 1");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

  tau_max_ = first_tau_below(rho, epsilon);
  const std::int64_t converged = first_tau_below(rho, 1e-17);
  const double total_mass = 1.0 / (1.0 - rho);

  std::int64_t half = 32;
  for (;;) {
    Grid grid(half);
    for (std::int64_t tau = 0; tau <= converged; ++tau) grid.step(decay, diffusion, tau);
    std::vector<double> by_distance(static_cast<std::size_t>(2 * half + 1), 0.0);
    for (std::int64_t y = -half; y <= half; ++y) {
      for (std::int64_t x = -half; x <= half; ++x) {
        by_distance[static_cast<std::size_t>(std::abs(x) + std::abs(y))] += grid.at(x, y);
      }
    }
    double inside = 0.0;
    std::int64_t found = -1;
    for (std::int64_t r = 0; r <= half; ++r) {
      inside += by_distance[static_cast<std::size_t>(r)];
      if (total_mass - inside < epsilon) {
        found = r;
        break;
      }
    }
    if (found >= 0 && found + 16 <= half) {
      radius_ = found;
      octant_size_ = static_cast<std::size_t>((radius_ + 1) * (radius_ + 2) / 2);
      steady_.assign(octant_size_, 0.0);
      for (std::int64_t a = 0; a <= radius_; ++a) {
        for (std::int64_t b = 0; b <= a && a + b <= radius_; ++b) steady_[octant_index(a, b)] = grid.at(a, b);
      }
      break;
    }
    if (half >= 4096) throw std::invalid_argument("diffusion kernel support is too large");
    half *= 2;
  }

  Grid grid(radius_ + 64);
  table_.assign(static_cast<std::size_t>(tau_max_ + 1) * octant_size_, 0.0);
  for (std::int64_t tau = 0; tau <= tau_max_; ++tau) {
    grid.step(decay, diffusion, tau);
    double* row = &table_[static_cast<std::size_t>(tau) * octant_size_];
    for (std::int64_t a = 0; a <= radius_; ++a) {
      for (std::int64_t b = 0; b <= a && a + b <= radius_; ++b) row[octant_index(a, b)] = grid.at(a, b);
    }
  }
}

std::shared_ptr<const DiffusionKernel> DiffusionKernel::shared(double decay, double diffusion, double epsilon) {
  static std::mutex mutex;
  static std::map<std::tuple<double, double, double>, std::shared_ptr<const DiffusionKernel>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{decay, diffusion, epsilon}];
  if (!slot) slot = std::make_shared<const DiffusionKernel>(decay, diffusion, epsilon);
  return slot;
}

std::size_t DiffusionKernel::octant_index(std::int64_t a, std::int64_t b) const {
  return static_cast<std::size_t>(a * (a + 1) / 2 + b);
}

double DiffusionKernel::value(std::int64_t tau, std::int64_t dx, std::int64_t dy) const {
  if (tau < 0) return 0.0;
  dx = std::abs(dx);
  dy = std::abs(dy);
  if (dx + dy > radius_) return 0.0;
  const std::int64_t a = std::max(dx, dy);
  const std::int64_t b = std::min(dx, dy);
  if (tau > tau_max_) return steady_[octant_index(a, b)];
  return table_[static_cast<std::size_t>(tau) * octant_size_ + octant_index(a, b)];
}

double DiffusionKernel::steady(std::int64_t dx, std::int64_t dy) const { return value(tau_max_ + 1, dx, dy); }

double DiffusionKernel::mass(std::int64_t tau) const {
  double total = 0.0;
  for (std::int64_t y = -radius_; y <= radius_; ++y) {
    for (std::int64_t x = -radius_; x <= radius_; ++x) total += value(tau, x, y);
  }
  return total;
}

}  // namespace jbw
