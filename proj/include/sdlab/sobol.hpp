#pragma once

#include <cstdint>
#include <vector>

namespace sdlab::opt {

struct Bounds {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t dim() const { return lo.size(); }
};

Bounds symmetric_box(std::size_t d, double half_width);

// Sobol low-discrepancy sequence (gray-code order, standard direction
// numbers, up to 8 dimensions). Index 0 of the raw sequence, the origin,
// is skipped: point k here is sequence element k+1.
class SobolSequence {
 public:
  explicit SobolSequence(std::size_t dim);
  std::vector<double> next();  // in [0,1)^d

 private:
  std::size_t dim_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> x_;
  std::vector<std::vector<std::uint32_t>> v_;  // per dim, 32 direction ints
};

// n points in [0,1)^d
std::vector<std::vector<double>> sobol_points(std::size_t d, std::size_t n);

// n Sobol points scaled to bounds. A nonzero seed applies a random digital
// shift (XOR scramble) so repeated runs decorrelate; seed 0 is the plain
// sequence.
std::vector<std::vector<double>> sobol_init(std::size_t d, std::size_t n, const Bounds& bounds,
                                            std::uint64_t seed = 0);

// Latin hypercube sample scaled to bounds (one stratum per point and
// dimension, positions and pairing shuffled by the seed).
std::vector<std::vector<double>> latin_hypercube(std::size_t d, std::size_t n, const Bounds& bounds,
                                                 std::uint64_t seed);

}  // namespace sdlab::opt
