#include "jbw/hash.hpp"

#include <cmath>

namespace jbw {

namespace {

double normalized_mix(std::int64_t n) {
  constexpr double kMax = 4294967295.0;
  return static_cast<double>(murmur_mix32(static_cast<std::uint32_t>(n))) / kMax;
}

}  // namespace

double hash_interp(double t) {
  const double floor_t = std::floor(t);
  const double w = t - floor_t;
  const auto n = static_cast<std::int64_t>(floor_t);
  const double lo = normalized_mix(n);
  if (w == 0.0) return lo;
  return (1.0 - w) * lo + w * normalized_mix(n + 1);
}

}  // namespace jbw
