#include "jbw/rng.hpp"

#include <stdexcept>

namespace jbw {

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) : state_(0), increment_((stream << 1U) | 1U) {
  next_u32();
  state_ += seed;
  next_u32();
}

Pcg32 Pcg32::from_raw(std::uint64_t state, std::uint64_t increment) {
  if ((increment & 1U) == 0) throw std::invalid_argument("pcg32 increment must be odd");
  return Pcg32(state, increment, 0);
}

std::uint32_t Pcg32::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kMultiplier + increment_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18U) ^ old) >> 27U);
  const auto rot = static_cast<std::uint32_t>(old >> 59U);
  return (xorshifted >> rot) | (xorshifted << ((32U - rot) & 31U));
}

std::uint32_t Pcg32::uniform_int(std::uint32_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_int bound must be positive");
  const std::uint32_t threshold = (0U - bound) % bound;
  for (;;) {
    const std::uint32_t r = next_u32();
    if (r >= threshold) return r % bound;
  }
}

double Pcg32::uniform_real() { return static_cast<double>(next_u32()) * (1.0 / 4294967296.0); }

}  // namespace jbw
