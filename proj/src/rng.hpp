#pragma once

#include <array>
#include <cstdint>

#include "common.hpp"

namespace rwre::rng {

// Counter-based generation keyed on (seed, site) or (seed, stream): realizing a
// value is a pure function of the key and counter, so environments and walk
// streams are reproducible independent of query order and thread scheduling.
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3" (SC'11).
class Philox {
 public:
  Philox(uint64_t key, uint64_t counter_hi, uint64_t counter_lo);

  uint32_t next_u32();
  uint64_t next_u64();
  // 53-bit uniform in [0, 1).
  double next_unit();

 private:
  void refill();

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> counter_;
  std::array<uint32_t, 4> block_{};
  int pos_ = 4;  // forces refill on first draw
};

// splitmix64 finalizer; good avalanche for seed folding.
uint64_t mix64(uint64_t x);

// Domain-separated sub-seed derivation.
uint64_t derive(uint64_t master, uint64_t tag, uint64_t index = 0);

// Fold lattice coordinates into a 64-bit counter block id.
uint64_t site_key(const Site& x);

inline constexpr uint64_t kTagSite = 0x736974656b65790full;
inline constexpr uint64_t kTagWalk = 0x77616c6b73747231ull;
inline constexpr uint64_t kTagReplica = 0x7265706c69636131ull;

}  // namespace rwre::rng
