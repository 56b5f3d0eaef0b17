#include "rng.hpp"

namespace rwre::rng {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = static_cast<uint64_t>(a) * b;
  lo = static_cast<uint32_t>(p);
  hi = static_cast<uint32_t>(p >> 32);
}

inline void philox_round(std::array<uint32_t, 4>& c, const std::array<uint32_t, 2>& k) {
  uint32_t hi0, lo0, hi1, lo1;
  mul_hi_lo(kPhiloxM0, c[0], hi0, lo0);
  mul_hi_lo(kPhiloxM1, c[2], hi1, lo1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox::Philox(uint64_t key, uint64_t counter_hi, uint64_t counter_lo) {
  key_ = {static_cast<uint32_t>(key), static_cast<uint32_t>(key >> 32)};
  counter_ = {static_cast<uint32_t>(counter_lo), static_cast<uint32_t>(counter_lo >> 32),
              static_cast<uint32_t>(counter_hi), static_cast<uint32_t>(counter_hi >> 32)};
}

void Philox::refill() {
  std::array<uint32_t, 4> c = counter_;
  std::array<uint32_t, 2> k = key_;
  for (int r = 0; r < 10; ++r) {
    philox_round(c, k);
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  block_ = c;
  pos_ = 0;
  // advance the 128-bit counter
  if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0) ++counter_[3];
}

uint32_t Philox::next_u32() {
  if (pos_ >= 4) refill();
  return block_[pos_++];
}

uint64_t Philox::next_u64() {
  uint64_t lo = next_u32();
  uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double Philox::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t derive(uint64_t master, uint64_t tag, uint64_t index) {
  return mix64(mix64(master ^ tag) ^ index);
}

uint64_t site_key(const Site& x) {
  uint64_t h = 0x5deece66d1ull ^ static_cast<uint64_t>(x.dim);
  for (int k = 0; k < x.dim; ++k) h = mix64(h ^ static_cast<uint64_t>(x.c[k]));
  return h;
}

}  // namespace rwre::rng
