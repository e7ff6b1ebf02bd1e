#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace jbw {

/// Response of the scent recurrence
///
///   S^t(p) = C^t(p) + decay * S^{t-1}(p) + diffusion * sum_{q in N4(p)} S^{t-1}(q)
///
/// to a unit source switched on at time 0 at the origin: value(tau, dx, dy) is
/// the scent at offset (dx, dy) tau steps later. The table stores tau up to
/// tau_max(), the first tau whose remaining temporal mass falls below epsilon;
/// later times use the steady state. Offsets beyond radius() (Manhattan) carry
/// less than epsilon of the steady-state mass in total and read as zero.
class DiffusionKernel {
 public:
  DiffusionKernel(double decay, double diffusion, double epsilon = 1e-9);

  /// Shared, lazily built kernel for a parameter set.
  static std::shared_ptr<const DiffusionKernel> shared(double decay, double diffusion, double epsilon = 1e-9);

  double value(std::int64_t tau, std::int64_t dx, std::int64_t dy) const;
  double steady(std::int64_t dx, std::int64_t dy) const;

  std::int64_t tau_max() const { return tau_max_; }
  std::int64_t radius() const { return radius_; }
  double decay() const { return decay_; }
  double diffusion() const { return diffusion_; }
  double epsilon() const { return epsilon_; }

  /// Values at time tau for every stored offset, indexed by offset_index();
  /// nullptr for tau < 0.
  const double* slice(std::int64_t tau) const {
    if (tau < 0) return nullptr;
    if (tau > tau_max_) return steady_.data();
    return table_.data() + static_cast<std::size_t>(tau) * octant_size_;
  }
  /// Index into slice() for an offset with |dx| + |dy| <= radius().
  static std::size_t offset_index(std::int64_t dx, std::int64_t dy) {
    const std::int64_t x = dx < 0 ? -dx : dx;
    const std::int64_t y = dy < 0 ? -dy : dy;
    const std::int64_t a = x > y ? x : y;
    const std::int64_t b = x > y ? y : x;
    return static_cast<std::size_t>(a * (a + 1) / 2 + b);
  }

  /// Total stored mass at time tau (sum over every offset within radius()).
  double mass(std::int64_t tau) const;

 private:
  std::size_t octant_index(std::int64_t dx, std::int64_t dy) const;

  double decay_;
  double diffusion_;
  double epsilon_;
  std::int64_t tau_max_{0};
  std::int64_t radius_{0};
  std::size_t octant_size_{0};
  std::vector<double> table_;   // (tau_max + 1) x octant
  std::vector<double> steady_;  // octant
};

}  // namespace jbw
