#pragma once

#include <cstdint>
#include <limits>

namespace binflux {

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a parent key and an ordinal.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Per-shot random stream. The stream of shot i is a pure function of
/// (seed, i), so shots can be generated in any order or partition.
/// Satisfies UniformRandomBitGenerator.
class ShotRng {
public:
  using result_type = std::uint64_t;

  constexpr ShotRng(std::uint64_t seed, std::uint64_t shot_index) noexcept
      : state_(derive_key(seed, shot_index)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return double((*this)() >> 11) * 0x1.0p-53; }

private:
  std::uint64_t state_;
};

} // namespace binflux
