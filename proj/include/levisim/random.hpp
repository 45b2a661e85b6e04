#pragma once

// Counter-based normal deviates: Philox4x32-10 keyed by the seed, with the
// step index and a channel number as the counter. Any draw can be recomputed
// in isolation, so trajectories do not depend on scheduling.

#include <array>
#include <cstdint>
#include <utility>

namespace levisim {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Two independent uniforms in (0, 1).
  std::pair<double, double> uniform_pair(std::uint64_t step, std::uint32_t channel) const;
  /// Two independent standard normals (Box-Muller).
  std::pair<double, double> normal_pair(std::uint64_t step, std::uint32_t channel) const;

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
};

}  // namespace levisim
