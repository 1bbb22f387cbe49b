#pragma once

#include <array>
#include <cstdint>

namespace icjm {

// Philox4x32-10 block cipher. Counter-based: the value at any (key, counter)
// is independent of evaluation order, so per-subject streams stay identical
// no matter how work is scheduled.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t ctr_lo,
                                        std::uint64_t ctr_hi);

std::uint64_t splitmix64(std::uint64_t x);

// One sequential random stream addressed by (seed, stream id).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double next_double();  // (0, 1)
  double next_uniform(double lo, double hi);
  double next_normal();  // standard normal via inverse CDF
  double next_gamma(double shape);  // unit scale
  double next_beta(double a, double b);

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;  // consumed
};

}  // namespace icjm
