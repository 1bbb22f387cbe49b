#include "icjm/rng.hpp"

#include <cmath>

#include "icjm/numerics.hpp"

namespace icjm {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * c[2];
  c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k0, std::uint32_t(p1),
       std::uint32_t(p0 >> 32) ^ c[3] ^ k1, std::uint32_t(p0)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t ctr_lo,
                                        std::uint64_t ctr_hi) {
  std::array<std::uint32_t, 4> c = {
      std::uint32_t(ctr_lo), std::uint32_t(ctr_lo >> 32),
      std::uint32_t(ctr_hi), std::uint32_t(ctr_hi >> 32)};
  std::uint32_t k0 = std::uint32_t(key);
  std::uint32_t k1 = std::uint32_t(key >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(c, k0, k1);
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed)), stream_(splitmix64(stream ^ 0xA5A5A5A5A5A5A5A5ull)) {}

std::uint64_t CounterRng::next_u64() {
  if (pos_ >= 4) {
    block_ = philox4x32(key_, counter_++, stream_);
    pos_ = 0;
  }
  const std::uint64_t lo = block_[pos_];
  const std::uint64_t hi = block_[pos_ + 1];
  pos_ += 2;
  return (hi << 32) | lo;
}

double CounterRng::next_double() {
  // 53 significant bits, offset by half an ulp so the result is in (0,1)
  return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double CounterRng::next_normal() { return inv_normal_cdf(next_double()); }

double CounterRng::next_gamma(double shape) {
  if (shape < 1.0) {
    // boost to shape+1 and scale back
    const double u = next_double();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double CounterRng::next_beta(double a, double b) {
  const double x = next_gamma(a);
  const double y = next_gamma(b);
  return x / (x + y);
}

}  // namespace icjm
