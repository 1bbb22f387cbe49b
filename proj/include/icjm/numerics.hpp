#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>

namespace icjm {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Fixed 15-point Gauss-Kronrod rule (QUADPACK dqk15 constants).
// Integrates polynomials up to degree 22 exactly.
struct GaussKronrod15 {
  static constexpr int n_points = 15;
  // ascending order on [-1, 1]
  static const std::array<double, 15> nodes;
  static const std::array<double, 15> weights;

  // Single application of the rule mapped to [a, b].
  template <class F>
  static double integrate(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n_points; ++i) acc += weights[i] * f(c + h * nodes[i]);
    return h * acc;
  }
};

// exp() suitable for auto-vectorization. Relative error < 5e-15 on
// [-708, 709]; returns 0 below -745 and +inf above 709.8.
void vexp(const double* x, double* y, int n);
inline void vexp_inplace(double* x, int n) { vexp(x, x, n); }
double fast_exp(double x);

// Inverse standard-normal CDF (Wichura's PPND16 rational approximations).
// p must lie in (0, 1).
double inv_normal_cdf(double p);

// log(e^a + e^b) without overflow; handles -inf operands.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp((a > b ? b : a) - m));
}

// Fixed-order pairwise summation. The result depends only on the order of
// the input values, never on thread count.
double pairwise_sum(std::span<const double> values);

struct BrentResult {
  double root = std::numeric_limits<double>::quiet_NaN();
  double f_root = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
};

// Root of f on a bracketing interval [a, b] (f(a), f(b) of opposite sign).
BrentResult brent_root(const std::function<double(double)>& f, double a,
                       double b, double xtol = 1e-12, double ftol = 1e-10,
                       int max_iter = 200);

}  // namespace icjm
