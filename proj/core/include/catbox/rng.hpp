#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace catbox {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent, reproducible streams from
/// (seed, counter) pairs without carrying generator state around.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform in the open interval (0, 1) from a 64-bit hash.
inline double hash_to_unit(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw addressed by (seed, index): Box-Muller over two hashed
/// uniforms. Identical across processes and platforms for a fixed seed.
inline double counter_normal(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t base = derive_seed(seed, index);
  const double u1 = hash_to_unit(splitmix64(base));
  const double u2 = hash_to_unit(splitmix64(base ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace catbox
