#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "icjm/sobol.hpp"

using namespace icjm;

TEST_CASE("sobol sequence is deterministic") {
  auto a = sobol_points(4, 257, 1, 0);
  auto b = sobol_points(4, 257, 1, 0);
  CHECK(a == b);
  auto c = sobol_points(4, 257, 1, 7);
  CHECK(a != c);
}

TEST_CASE("dimension 1 reproduces the dyadic van der Corput set") {
  // points 1 .. 2^k - 1 of the raw sequence hit every j/2^k exactly once
  const int k = 6, n = (1 << k) - 1;
  auto pts = sobol_points(1, n, 1, 0);
  std::sort(pts.begin(), pts.end());
  for (int j = 1; j <= n; ++j)
    CHECK(std::fabs(pts[j - 1] - j / double(1 << k)) < 1e-6);
}

TEST_CASE("each coordinate is dyadically stratified") {
  // over the first 4095 points (origin dropped), each of 64 equal bins per
  // coordinate holds 64 points except the origin's bin with 63
  const int n = 4095, bins = 64, dim = 8;
  auto pts = sobol_points(dim, n, 1, 0);
  for (int d = 0; d < dim; ++d) {
    std::vector<int> cnt(bins, 0);
    for (int s = 0; s < n; ++s)
      cnt[int(pts[std::size_t(s) * dim + d] * bins)]++;
    int n63 = 0;
    for (int c : cnt) {
      CHECK(c >= 63);
      CHECK(c <= 64);
      n63 += c == 63;
    }
    CHECK(n63 == 1);
  }
}

TEST_CASE("pairwise projections are nearly uncorrelated") {
  const int n = 4096, dim = 8;
  auto pts = sobol_points(dim, n, 1, 0);
  std::vector<double> mean(dim, 0.0);
  for (int s = 0; s < n; ++s)
    for (int d = 0; d < dim; ++d) mean[d] += pts[std::size_t(s) * dim + d];
  for (auto& m : mean) m /= n;
  for (int d = 0; d < dim; ++d) CHECK(std::fabs(mean[d] - 0.5) < 0.002);
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) {
      double cov = 0, va = 0, vb = 0;
      for (int s = 0; s < n; ++s) {
        const double xa = pts[std::size_t(s) * dim + a] - mean[a];
        const double xb = pts[std::size_t(s) * dim + b] - mean[b];
        cov += xa * xb;
        va += xa * xa;
        vb += xb * xb;
      }
      CHECK(std::fabs(cov / std::sqrt(va * vb)) < 0.02);
    }
}

TEST_CASE("scrambling keeps stratification") {
  const int n = 4095, bins = 64, dim = 4;
  auto pts = sobol_points(dim, n, 1, 42);
  for (int d = 0; d < dim; ++d) {
    std::vector<int> cnt(bins, 0);
    for (int s = 0; s < n; ++s)
      cnt[int(pts[std::size_t(s) * dim + d] * bins)]++;
    for (int c : cnt) {
      CHECK(c >= 63);
      CHECK(c <= 64);
    }
  }
}

TEST_CASE("sobol rejects unsupported dimensions") {
  CHECK_THROWS(SobolSequence(0));
  CHECK_THROWS(SobolSequence(9));
}
