#pragma once

#include <cstdint>

namespace ctsim::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// Stafford mix13 finalizer; bijective on 64 bits.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based key derivation: distinct ids give decorrelated keys,
// independent of evaluation order.
inline std::uint64_t derive(std::uint64_t key, std::uint64_t id) {
  return mix64(key + kGolden * id);
}

inline std::uint64_t master_key(std::uint64_t seed) {
  return mix64(seed ^ 0x6a09e667f3bcc909ull);
}

// 52 random bits mapped into (0,1); never returns 0 or 1.
inline double u64_to_unit(std::uint64_t x) {
  double f = (double)(x >> 12) * 0x1.0p-52;
  return f + 0x1.0p-53;
}

// Owned random stream. Each consumer forks its own from a master seed;
// streams are never shared across threads.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key), ctr_(0) {}

  static Stream from_seed(std::uint64_t seed) { return Stream(master_key(seed)); }

  Stream fork(std::uint64_t id) const { return Stream(derive(key_, 0x8000000000000000ull ^ id)); }

  std::uint64_t next_u64() { return derive(key_, ctr_++); }
  double next_unit() { return u64_to_unit(next_u64()); }
  bool next_bernoulli(double p) { return next_unit() < p; }
  double next_normal();  // standard normal via inverse CDF (pack.hpp)

  // uniform on [lo, hi)
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace ctsim::rng
