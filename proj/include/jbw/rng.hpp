#pragma once

#include <cstdint>

namespace jbw {

/// PCG-XSH-RR 64/32. The complete generator state is (state, increment), so two
/// generators with equal words produce equal streams on every platform.
class Pcg32 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kDefaultStream = 0xda3e39cb94b95bdbULL;

  /// Seeds like the reference pcg32_srandom_r(seed, stream).
  explicit Pcg32(std::uint64_t seed = 0x853c49e6748fea9bULL, std::uint64_t stream = kDefaultStream);

  /// Restores a generator from its raw words. `increment` must be odd.
  static Pcg32 from_raw(std::uint64_t state, std::uint64_t increment);

  std::uint32_t next_u32();

  /// Uniform integer in [0, bound) by rejection sampling; bound must be > 0.
  std::uint32_t uniform_int(std::uint32_t bound);

  /// Uniform real in [0, 1) with 32 bits of resolution (n / 2^32).
  double uniform_real();

  std::uint64_t state() const { return state_; }
  std::uint64_t increment() const { return increment_; }

  friend bool operator==(const Pcg32&, const Pcg32&) = default;

 private:
  Pcg32(std::uint64_t state, std::uint64_t increment, int) : state_(state), increment_(increment) {}

  std::uint64_t state_{0};
  std::uint64_t increment_{1};
};

}  // namespace jbw
