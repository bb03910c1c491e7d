#pragma once

#include <cstdint>
#include <string_view>

namespace uhoi {

// xoshiro256** seeded through SplitMix64 (Blackman & Vigna). Every seeded
// draw in the library goes through this generator instead of the standard
// library engines/distributions, whose outputs differ between
// implementations.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Derive an independent stream seed from a run seed and a string key
// (e.g. a pair id), so per-key draws do not depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

}  // namespace uhoi
