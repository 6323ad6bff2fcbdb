#include "sdlab/sobol.hpp"

#include <stdexcept>

#include "sdlab/rng.hpp"

namespace sdlab::opt {

namespace {

// first rows of the Joe-Kuo direction-number table (dimension 2 onward):
// {s, a, m_1..m_s}
struct JkRow {
  int s;
  std::uint32_t a;
  std::uint32_t m[5];
};

constexpr JkRow kJoeKuo[7] = {
    {1, 0, {1, 0, 0, 0, 0}},   // dim 2
    {2, 1, {1, 3, 0, 0, 0}},   // dim 3
    {3, 1, {1, 3, 1, 0, 0}},   // dim 4
    {3, 2, {1, 1, 1, 0, 0}},   // dim 5
    {4, 1, {1, 1, 3, 3, 0}},   // dim 6
    {4, 4, {1, 3, 5, 13, 0}},  // dim 7
    {5, 2, {1, 1, 5, 5, 17}},  // dim 8
};

constexpr int kBits = 32;

int lowest_zero_bit(std::uint64_t n) {
  int c = 0;
  while (n & 1ull) {
    n >>= 1;
    ++c;
  }
  return c;
}

}  // namespace

Bounds symmetric_box(std::size_t d, double half_width) {
  Bounds b;
  b.lo.assign(d, -half_width);
  b.hi.assign(d, half_width);
  return b;
}

SobolSequence::SobolSequence(std::size_t dim) : dim_(dim) {
  if (dim < 1 || dim > 8) throw std::invalid_argument("sobol: dimension must be in 1..8");
  x_.assign(dim, 0);
  v_.assign(dim, std::vector<std::uint32_t>(kBits, 0));
  // dimension 1: van der Corput, v_k = 2^(32-k)
  for (int k = 0; k < kBits; ++k) v_[0][k] = 1u << (31 - k);
  for (std::size_t d = 1; d < dim; ++d) {
    const JkRow& row = kJoeKuo[d - 1];
    std::vector<std::uint32_t> m(kBits);
    for (int k = 0; k < row.s; ++k) m[k] = row.m[k];
    for (int k = row.s; k < kBits; ++k) {
      std::uint32_t mk = m[k - row.s] ^ (m[k - row.s] << row.s);
      for (int i = 1; i < row.s; ++i)
        if ((row.a >> (row.s - 1 - i)) & 1u) mk ^= m[k - i] << i;
      m[k] = mk;
    }
    for (int k = 0; k < kBits; ++k) v_[d][k] = m[k] << (31 - k);
  }
}

std::vector<double> SobolSequence::next() {
  const int c = lowest_zero_bit(index_);
  ++index_;
  std::vector<double> p(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    x_[d] ^= v_[d][c];
    p[d] = static_cast<double>(x_[d]) * 0x1.0p-32;
  }
  return p;
}

std::vector<std::vector<double>> sobol_points(std::size_t d, std::size_t n) {
  SobolSequence seq(d);
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(seq.next());
  return pts;
}

std::vector<std::vector<double>> sobol_init(std::size_t d, std::size_t n, const Bounds& bounds,
                                            std::uint64_t seed) {
  if (bounds.dim() != d) throw std::invalid_argument("sobol_init: bounds dimension mismatch");
  if (n < 1) throw std::invalid_argument("sobol_init: n must be >= 1");
  std::vector<std::uint32_t> shift(d, 0);
  if (seed != 0) {
    Rng rng(Rng::mix(seed, 0x50b01ull));
    for (std::size_t j = 0; j < d; ++j) shift[j] = static_cast<std::uint32_t>(rng.next_u64() >> 32);
  }
  SobolSequence seq(d);
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> u = seq.next();
    std::vector<double> p(d);
    for (std::size_t j = 0; j < d; ++j) {
      double uj = u[j];
      if (seed != 0) {
        const auto bits = static_cast<std::uint32_t>(uj * 4294967296.0);
        uj = static_cast<double>(bits ^ shift[j]) * 0x1.0p-32;
      }
      p[j] = bounds.lo[j] + (bounds.hi[j] - bounds.lo[j]) * uj;
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

std::vector<std::vector<double>> latin_hypercube(std::size_t d, std::size_t n, const Bounds& bounds,
                                                 std::uint64_t seed) {
  if (bounds.dim() != d) throw std::invalid_argument("latin_hypercube: bounds dimension mismatch");
  Rng rng(Rng::mix(seed, 0x1a71ull));
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t k = rng.uniform_int(i);
      std::swap(perm[i - 1], perm[k]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
      pts[i][j] = bounds.lo[j] + (bounds.hi[j] - bounds.lo[j]) * u;
    }
  }
  return pts;
}

}  // namespace sdlab::opt
