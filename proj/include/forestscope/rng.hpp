#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace forestscope {

// All sampling goes through std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Standard distributions are not portable across library
// implementations, so bounded draws use our own rejection sampler.
using Generator = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for one trial: mix64(mix64(master ^ fnv1a64(stream)) + trial).
/// Depends only on its arguments, so trial order and worker count do not
/// change any draw.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                    std::uint64_t trial) noexcept {
  return mix64(mix64(master ^ fnv1a64(stream)) + trial);
}

/// Uniform integer in [0, bound). bound must be > 0.
inline std::uint64_t uniform_below(Generator& gen, std::uint64_t bound) {
  // Reject the low partial block so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace forestscope
