#pragma once

#include <cstddef>
#include <cstdint>

namespace jbw {

/// MurmurHash3 32-bit finalizer (fmix32), constants 0x85EBCA6B and 0xC2B2AE35.
constexpr std::uint32_t murmur_mix32(std::uint32_t h) {
  h ^= h >> 16;
  h *= 0x85EBCA6BU;
  h ^= h >> 13;
  h *= 0xC2B2AE35U;
  h ^= h >> 16;
  return h;
}

/// Piecewise-linear interpolation of murmur_mix32(floor(t)) / (2^32 - 1) and
/// murmur_mix32(floor(t) + 1) / (2^32 - 1). Integers are reduced mod 2^32
/// (two's complement) before mixing, so negative arguments are well defined.
/// The result always lies in [0, 1].
double hash_interp(double t);

/// 64-bit FNV-1a, used for save-file checksums and state digests.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_{0xcbf29ce484222325ULL};
};

}  // namespace jbw
