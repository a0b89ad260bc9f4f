#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace ams {

/// Identifies one random stream: everything drawn for a given key is a pure
/// function of the key, so replicas can be advanced in any order or on any thread.
struct RngKey {
  std::uint64_t master_seed = 0;
  std::uint32_t replica_id = 0;
  std::uint32_t branch_generation = 0;
  std::uint64_t step_counter = 0;

  RngKey at_step(std::uint64_t step) const {
    RngKey k = *this;
    k.step_counter = step;
    return k;
  }
  friend bool operator==(const RngKey&, const RngKey&) = default;
};

using PhiloxBlock = std::array<std::uint64_t, 4>;

/// Philox4x64-10 block cipher (Salmon et al., SC'11).
PhiloxBlock philox4x64(PhiloxBlock counter, std::array<std::uint64_t, 2> key);

/// Standard normal variates for `key`, written to `out`. `stream` selects an
/// independent sub-stream under the same key.
void fill_gaussian(const RngKey& key, std::span<double> out, std::uint32_t stream = 0);

/// Uniform variates in [0, 1).
void fill_uniform(const RngKey& key, std::span<double> out, std::uint32_t stream = 0);

/// Uniform integer in [0, bound) drawn from (key, stream); bound must be > 0.
std::uint64_t uniform_index(const RngKey& key, std::uint64_t bound, std::uint32_t stream = 0);

/// SplitMix64 finalizer, used to derive per-realization master seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace ams
