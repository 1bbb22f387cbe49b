#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "icjm/numerics.hpp"

using namespace icjm;

namespace {

// Regularized standard normal CDF through erfc, accurate to ~1e-16; the
// independent check for the inverse CDF.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("gk15 weights sum to 2") {
  double sum = 0.0;
  for (double w : GaussKronrod15::weights) sum += w;
  CHECK(std::fabs(sum - 2.0) <= 1e-14);
}

TEST_CASE("gk15 integrates monomials up to degree 22 exactly") {
  // exact antiderivative oracle: int_a^b t^k dt = (b^{k+1}-a^{k+1})/(k+1)
  const auto exact = [](int k, double a, double b) {
    return (std::pow(b, k + 1) - std::pow(a, k + 1)) / (k + 1);
  };
  for (auto [a, b] : {std::pair{-1.0, 1.0}, std::pair{0.3, 1.7}}) {
    for (int k = 0; k <= 22; ++k) {
      const double got =
          GaussKronrod15::integrate([&](double t) { return std::pow(t, k); }, a, b);
      const double want = exact(k, a, b);
      CHECK(std::fabs(got - want) <=
            1e-12 * std::max(1.0, std::fabs(want)));
    }
  }
  // a genuinely non-polynomial integrand on a wide interval shows error
  const double got = GaussKronrod15::integrate(
      [](double t) { return std::sqrt(t); }, 0.0, 9.0);
  CHECK(std::fabs(got - 18.0) > 1e-12 * 18.0);
  CHECK(std::fabs(got - 18.0) < 1e-3 * 18.0);
}

TEST_CASE("vexp matches std::exp") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs;
  for (int i = 0; i < 200000; ++i) {
    const double mag = std::pow(10.0, -3.0 + 5.8 * std::fabs(u(gen)));
    xs.push_back(u(gen) < 0 ? -std::min(mag, 700.0) : std::min(mag, 700.0));
  }
  xs.push_back(0.0);
  xs.push_back(-708.0);
  xs.push_back(709.0);
  std::vector<double> ys(xs.size());
  vexp(xs.data(), ys.data(), int(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double want = std::exp(xs[i]);
    CHECK(std::fabs(ys[i] - want) <= 5e-15 * want);
  }
  CHECK(fast_exp(-746.0) == 0.0);
  CHECK(std::isinf(fast_exp(710.0)));
}

TEST_CASE("inverse normal cdf round-trips against erfc") {
  std::vector<double> ps = {0.5, 0.975, 0.025, 1e-1, 1e-3, 1e-8, 1e-16, 1e-30,
                            1e-100, 1e-300};
  for (double p : ps) {
    for (double q : {p, 1.0 - p}) {
      if (!(q > 0.0 && q < 1.0)) continue;
      const double x = inv_normal_cdf(q);
      const double back = normal_cdf(x);
      CHECK(std::fabs(back - q) <= 1e-13 * std::max(q, 1e-12));
    }
  }
  CHECK(inv_normal_cdf(0.5) == 0.0);
  CHECK(std::fabs(inv_normal_cdf(0.975) - 1.959963984540054) < 1e-12);
  CHECK(inv_normal_cdf(0.2) ==
        doctest::Approx(-inv_normal_cdf(0.8)).epsilon(1e-14));
  CHECK_THROWS(inv_normal_cdf(0.0));
  CHECK_THROWS(inv_normal_cdf(1.0));
}

TEST_CASE("pairwise sum is accurate and order-stable") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(1001);
  long double want = 0.0;
  for (auto& x : v) {
    x = u(gen) * 1e6;
    want += x;
  }
  const double got = pairwise_sum(v);
  CHECK(std::fabs(got - double(want)) <= 1e-6);
  CHECK(pairwise_sum(v) == got);
}

TEST_CASE("log_add_exp") {
  CHECK(log_add_exp(kNegInf, 1.5) == 1.5);
  CHECK(log_add_exp(1.5, kNegInf) == 1.5);
  CHECK(std::fabs(log_add_exp(0.0, 0.0) - std::log(2.0)) < 1e-15);
  CHECK(std::fabs(log_add_exp(-1000.0, -1001.0) -
                  (-1000.0 + std::log1p(std::exp(-1.0)))) < 1e-12);
}

TEST_CASE("brent finds roots") {
  auto r = brent_root([](double x) { return std::cos(x); }, 0.0, 3.0, 1e-14);
  CHECK(r.converged);
  CHECK(std::fabs(r.root - M_PI / 2) < 1e-12);

  // exponential-hazard inversion: c t = -log(u) with c = 0.5, u = e^{-1}
  const double c = 0.5, u = std::exp(-1.0);
  auto r2 = brent_root([&](double t) { return c * t + std::log(u); }, 0.0,
                       16.0, 1e-12, 1e-12);
  CHECK(r2.converged);
  CHECK(std::fabs(r2.root - 2.0) < 1e-9);

  CHECK_THROWS(brent_root([](double x) { return x * x + 1.0; }, -1.0, 1.0));
}
