#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace icjm::detail {

// Cody-Waite range reduction plus a degree-12 kernel; |r| <= 0.3466 keeps
// the truncation error below 2e-16 relative. Auto-vectorizes under
// `#pragma omp simd`.
inline double exp_body(double x) {
  constexpr double kLog2E = 1.44269504088896340736;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  double xc = x > 709.0 ? 709.0 : (x < -708.0 ? -708.0 : x);
  double k = std::nearbyint(xc * kLog2E);
  double r = (xc - k * kLn2Hi) - k * kLn2Lo;
  double p = 2.0876756987868098979210e-09;
  p = p * r + 2.5052108385441718775000e-08;
  p = p * r + 2.7557319223985890652557e-07;
  p = p * r + 2.7557319223985890652557e-06;
  p = p * r + 2.4801587301587301587302e-05;
  p = p * r + 1.9841269841269841269841e-04;
  p = p * r + 1.3888888888888888888889e-03;
  p = p * r + 8.3333333333333333333333e-03;
  p = p * r + 4.1666666666666666666667e-02;
  p = p * r + 1.6666666666666666666667e-01;
  p = p * r + 5.0e-01;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const auto bits =
      static_cast<std::uint64_t>(static_cast<std::int64_t>(k) + 1023) << 52;
  double out = p * std::bit_cast<double>(bits);
  out = x < -745.0 ? 0.0 : out;
  out = x > 709.8 ? std::numeric_limits<double>::infinity() : out;
  return out;
}

}  // namespace icjm::detail
