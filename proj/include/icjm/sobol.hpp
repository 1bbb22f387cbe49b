#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace icjm {

// Sobol low-discrepancy sequence (gray-code construction, 32-bit precision,
// Joe-Kuo direction numbers). Supports up to 8 dimensions, which covers the
// random-effects dimension q + 2 for every model in scope.
class SobolSequence {
 public:
  static constexpr int max_dimension = 8;

  // skip drops the leading points of the raw sequence (the first raw point
  // is the origin, which the inverse-normal map cannot accept). A nonzero
  // scramble id applies a deterministic digital shift per dimension.
  explicit SobolSequence(int dimension, int skip = 1,
                         std::uint64_t scramble_id = 0);

  // Writes the next point into out (components in (0,1)).
  void next(std::span<double> out);

  int dimension() const { return dim_; }

 private:
  void advance();

  int dim_;
  std::uint64_t index_ = 0;  // points emitted from the raw sequence
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
  std::vector<std::uint32_t> dirs_;  // dim x 32, row-major
};

// n points as a column-major matrix: point s occupies column s of an
// (dimension x n) array.
std::vector<double> sobol_points(int dimension, int n, int skip = 1,
                                 std::uint64_t scramble_id = 0);

}  // namespace icjm
