#include "icjm/sobol.hpp"

#include <bit>
#include <stdexcept>

#include "icjm/rng.hpp"

namespace icjm {

namespace {

// Joe-Kuo primitive polynomials and initial direction numbers for
// dimensions 2..8 (dimension 1 uses m_k = 1 for all k).
struct JoeKuoEntry {
  int s;
  std::uint32_t a;
  std::uint32_t m[5];
};

constexpr JoeKuoEntry kJoeKuo[] = {
    {1, 0, {1, 0, 0, 0, 0}},        // dim 2
    {2, 1, {1, 3, 0, 0, 0}},        // dim 3
    {3, 1, {1, 3, 1, 0, 0}},        // dim 4
    {3, 2, {1, 1, 1, 0, 0}},        // dim 5
    {4, 1, {1, 1, 3, 3, 0}},        // dim 6
    {4, 4, {1, 3, 5, 13, 0}},       // dim 7
    {5, 2, {1, 1, 5, 5, 17}},       // dim 8
};

constexpr int kBits = 32;

}  // namespace

SobolSequence::SobolSequence(int dimension, int skip, std::uint64_t scramble_id)
    : dim_(dimension) {
  if (dimension < 1 || dimension > max_dimension)
    throw std::invalid_argument("SobolSequence: dimension must be in 1..8");
  if (skip < 0) throw std::invalid_argument("SobolSequence: negative skip");
  dirs_.assign(std::size_t(dim_) * kBits, 0);
  for (int d = 0; d < dim_; ++d) {
    std::uint32_t* v = &dirs_[std::size_t(d) * kBits];
    if (d == 0) {
      for (int k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
      continue;
    }
    const JoeKuoEntry& e = kJoeKuo[d - 1];
    for (int k = 0; k < e.s; ++k) v[k] = e.m[k] << (kBits - 1 - k);
    for (int k = e.s; k < kBits; ++k) {
      v[k] = v[k - e.s] ^ (v[k - e.s] >> e.s);
      for (int i = 1; i < e.s; ++i)
        if ((e.a >> (e.s - 1 - i)) & 1u) v[k] ^= v[k - i];
    }
  }
  state_.assign(dim_, 0);
  shift_.assign(dim_, 0);
  if (scramble_id != 0) {
    for (int d = 0; d < dim_; ++d)
      shift_[d] = std::uint32_t(splitmix64(scramble_id * 1000003ull + d) >> 32);
  }
  for (int i = 0; i < skip; ++i) advance();
}

void SobolSequence::advance() {
  // gray-code step: flip the direction of the lowest zero bit of the index
  const int c = std::countr_one(index_);
  if (c >= kBits) throw std::runtime_error("SobolSequence exhausted");
  for (int d = 0; d < dim_; ++d)
    state_[d] ^= dirs_[std::size_t(d) * kBits + c];
  ++index_;
}

void SobolSequence::next(std::span<double> out) {
  if (int(out.size()) != dim_)
    throw std::invalid_argument("SobolSequence::next: size mismatch");
  for (int d = 0; d < dim_; ++d)
    out[d] = (double(state_[d] ^ shift_[d]) + 0.5) * 0x1.0p-32;
  advance();
}

std::vector<double> sobol_points(int dimension, int n, int skip,
                                 std::uint64_t scramble_id) {
  SobolSequence seq(dimension, skip, scramble_id);
  std::vector<double> pts(std::size_t(dimension) * n);
  for (int s = 0; s < n; ++s)
    seq.next({&pts[std::size_t(s) * dimension], std::size_t(dimension)});
  return pts;
}

}  // namespace icjm
