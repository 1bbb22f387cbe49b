#include <cmath>
#include <vector>

#include "doctest.h"
#include "icjm/rng.hpp"

using namespace icjm;

TEST_CASE("philox4x32-10 known answers") {
  auto z = philox4x32(0, 0, 0);
  CHECK(z[0] == 0x6627e8d5u);
  CHECK(z[1] == 0xe169c58du);
  CHECK(z[2] == 0xbc57ac4cu);
  CHECK(z[3] == 0x9b00dbd8u);
  auto f = philox4x32(~0ull, ~0ull, ~0ull);
  CHECK(f[0] == 0x408f276du);
  CHECK(f[1] == 0x41c83b0eu);
  CHECK(f[2] == 0xa20bc7c6u);
  CHECK(f[3] == 0x6d5451fdu);
}

TEST_CASE("counter rng streams are deterministic and distinct") {
  CounterRng a(123, 5), b(123, 5), c(123, 6), d(124, 5);
  bool same_c = true, same_d = true;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    same_c = same_c && va == c.next_u64();
    same_d = same_d && va == d.next_u64();
  }
  CHECK_FALSE(same_c);
  CHECK_FALSE(same_d);
}

TEST_CASE("counter rng distributions have the right moments") {
  CounterRng rng(2024, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sb = 0, sb2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    su += u;
    su2 += u * u;
    const double z = rng.next_normal();
    sn += z;
    sn2 += z * z;
    const double x = rng.next_beta(2.0, 5.0);
    sb += x;
    sb2 += x * x;
  }
  CHECK(std::fabs(su / n - 0.5) < 0.005);
  CHECK(std::fabs(su2 / n - 1.0 / 3.0) < 0.005);
  CHECK(std::fabs(sn / n) < 0.01);
  CHECK(std::fabs(sn2 / n - 1.0) < 0.02);
  // Beta(2,5): mean 2/7, variance 10/392
  CHECK(std::fabs(sb / n - 2.0 / 7.0) < 0.005);
  const double vb = sb2 / n - (sb / n) * (sb / n);
  CHECK(std::fabs(vb - 10.0 / 392.0) < 0.002);
}

TEST_CASE("gamma sampler moments") {
  CounterRng rng(99, 1);
  for (double shape : {0.7, 1.0, 3.5}) {
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.next_gamma(shape);
      s += g;
      s2 += g * g;
    }
    CHECK(std::fabs(s / n - shape) < 0.05 * std::max(1.0, shape));
    const double var = s2 / n - (s / n) * (s / n);
    CHECK(std::fabs(var - shape) < 0.1 * std::max(1.0, shape));
  }
}
