#include "ams/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ams {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

__extension__ typedef unsigned __int128 u128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const u128 p = static_cast<u128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

// The key packs (seed, replica, generation); the counter packs (step, block, stream).
inline PhiloxBlock block_for(const RngKey& key, std::uint64_t block, std::uint32_t stream) {
  const std::array<std::uint64_t, 2> k = {
      key.master_seed,
      (static_cast<std::uint64_t>(key.replica_id) << 32) | key.branch_generation};
  return philox4x64({key.step_counter, block, stream, 0}, k);
}

// 53-bit uniform in [0, 1).
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

PhiloxBlock philox4x64(PhiloxBlock ctr, std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

void fill_gaussian(const RngKey& key, std::span<double> out, std::uint32_t stream) {
  // Box-Muller: each Philox block yields two pairs of normals.
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (std::uint64_t block = 0; i < n; ++block) {
    const PhiloxBlock r = block_for(key, block, stream);
    for (int pair = 0; pair < 2 && i < n; ++pair) {
      const double u1 = 1.0 - to_unit(r[2 * pair]);  // (0, 1]
      const double u2 = to_unit(r[2 * pair + 1]);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      out[i++] = radius * std::cos(angle);
      if (i < n) out[i++] = radius * std::sin(angle);
    }
  }
}

void fill_uniform(const RngKey& key, std::span<double> out, std::uint32_t stream) {
  std::size_t i = 0;
  for (std::uint64_t block = 0; i < out.size(); ++block) {
    const PhiloxBlock r = block_for(key, block, stream);
    for (int j = 0; j < 4 && i < out.size(); ++j) out[i++] = to_unit(r[j]);
  }
}

std::uint64_t uniform_index(const RngKey& key, std::uint64_t bound, std::uint32_t stream) {
  if (bound == 0) throw std::invalid_argument("uniform_index: bound must be > 0");
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (std::uint64_t block = 0;; ++block) {
    const PhiloxBlock r = block_for(key, block, stream);
    for (std::uint64_t v : r)
      if (v < limit) return v % bound;
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + (salt + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ams
