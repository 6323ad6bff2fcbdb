#pragma once

#include <cstdint>
#include <vector>

#include "sdlab/rng.hpp"

namespace sdlab::ex {

// L x L spin lattice with periodic boundaries, J = k = 1. Energy and
// magnetization are maintained incrementally by the sweep kernel.
class IsingLattice {
 public:
  explicit IsingLattice(int side = 32);

  // exactly floor(N (1 + m_init) / 2) up spins, placed uniformly at random
  static IsingLattice random_with_magnetization(int side, double m_init, std::uint64_t seed);

  int side() const { return side_; }
  int sites() const { return side_ * side_; }
  int spin(int r, int c) const { return spins_[index(r, c)]; }
  void set_spin(int r, int c, int s);

  double energy() const { return energy_; }
  double magnetization() const { return static_cast<double>(spin_sum_) / sites(); }

  double recompute_energy() const;  // O(N) reference, for bookkeeping checks

  // one sweep = N single-spin Metropolis proposals at random sites
  void metropolis_sweep(double beta, Rng& rng);

 private:
  int index(int r, int c) const { return r * side_ + c; }
  int neighbor_sum(int r, int c) const;
  void refresh_cache();

  int side_;
  std::vector<std::int8_t> spins_;
  double energy_ = 0.0;
  long spin_sum_ = 0;
};

// Onsager's spontaneous magnetization: (1 - sinh(2 beta)^-4)^(1/8) above
// the critical coupling, zero below it.
double onsager_magnetization(double beta);

inline constexpr double kIsingBetaCritical = 0.44068679350977151262;  // asinh(1)/2

struct TsolOptions {
  double eps = 0.02;
  int window = 50;
  int cap = 50000;
  int side = 32;
};

struct TsolResult {
  int sweeps = 0;
  bool capped = false;
};

// Sweeps until the trailing-window mean of |M| stays within eps of the
// Onsager value; the cap is returned (flagged) on timeout.
TsolResult time_to_equilibrium(double m_init, double beta, std::uint64_t seed,
                               const TsolOptions& options = {});

// Mean t_sol over n_seeds chains, negated so the AL loop can maximize it.
double ising_al_objective(double m_init, double beta, std::uint64_t seed, int n_seeds = 3,
                          const TsolOptions& options = {});

struct MagnetizationStats {
  double mean_abs_m = 0.0;
  double mean_m = 0.0;
};

// burn-in then sample <|M|> and <M> once per sweep
MagnetizationStats sample_magnetization(double beta, double m_init, int burn_in_sweeps,
                                        int sample_sweeps, std::uint64_t seed, int side = 32);

}  // namespace sdlab::ex
