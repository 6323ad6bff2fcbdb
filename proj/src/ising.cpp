#include "sdlab/ising.hpp"

#include <cmath>
#include <stdexcept>

namespace sdlab::ex {

IsingLattice::IsingLattice(int side) : side_(side), spins_(side * side, 1) {
  if (side < 2) throw std::invalid_argument("ising: side must be >= 2");
  refresh_cache();
}

IsingLattice IsingLattice::random_with_magnetization(int side, double m_init, std::uint64_t seed) {
  if (m_init < -1.0 || m_init > 1.0)
    throw std::invalid_argument("ising: m_init must be in [-1, 1]");
  IsingLattice lat(side);
  const int n = lat.sites();
  const int n_up = static_cast<int>(std::floor(n * (1.0 + m_init) / 2.0));
  for (auto& s : lat.spins_) s = -1;
  // Fisher-Yates choice of up sites
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(Rng::mix(seed, 0x151ull));
  for (int i = 0; i < n_up; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(n - i));
    std::swap(idx[i], idx[j]);
    lat.spins_[idx[i]] = 1;
  }
  lat.refresh_cache();
  return lat;
}

void IsingLattice::set_spin(int r, int c, int s) {
  if (s != 1 && s != -1) throw std::invalid_argument("ising: spins are +1 or -1");
  spins_[index(r, c)] = static_cast<std::int8_t>(s);
  refresh_cache();
}

int IsingLattice::neighbor_sum(int r, int c) const {
  const int up = (r == 0) ? side_ - 1 : r - 1;
  const int dn = (r == side_ - 1) ? 0 : r + 1;
  const int lf = (c == 0) ? side_ - 1 : c - 1;
  const int rt = (c == side_ - 1) ? 0 : c + 1;
  return spins_[index(up, c)] + spins_[index(dn, c)] + spins_[index(r, lf)] +
         spins_[index(r, rt)];
}

double IsingLattice::recompute_energy() const {
  long e = 0;
  for (int r = 0; r < side_; ++r)
    for (int c = 0; c < side_; ++c) {
      const int s = spins_[index(r, c)];
      const int rt = (c == side_ - 1) ? 0 : c + 1;
      const int dn = (r == side_ - 1) ? 0 : r + 1;
      e -= s * spins_[index(r, rt)];
      e -= s * spins_[index(dn, c)];
    }
  return static_cast<double>(e);
}

void IsingLattice::refresh_cache() {
  energy_ = recompute_energy();
  spin_sum_ = 0;
  for (auto s : spins_) spin_sum_ += s;
}

void IsingLattice::metropolis_sweep(double beta, Rng& rng) {
  if (beta <= 0.0) throw std::invalid_argument("ising: beta must be > 0");
  // acceptance lookup for the two uphill cases, dE in {4, 8}
  const double acc4 = std::exp(-4.0 * beta);
  const double acc8 = std::exp(-8.0 * beta);
  const int n = sites();
  for (int k = 0; k < n; ++k) {
    const int site = static_cast<int>(rng.uniform_int(n));
    const int r = site / side_, c = site % side_;
    const int s = spins_[site];
    const int nb = neighbor_sum(r, c);
    const int de = 2 * s * nb;
    bool accept = de <= 0;
    if (!accept) accept = rng.uniform() < (de == 4 ? acc4 : acc8);
    if (accept) {
      spins_[site] = static_cast<std::int8_t>(-s);
      spin_sum_ -= 2 * s;
      energy_ += de;
    }
  }
}

double onsager_magnetization(double beta) {
  if (beta <= 0.0) throw std::invalid_argument("onsager: beta must be > 0");
  const double sh = std::sinh(2.0 * beta);
  if (sh <= 1.0) return 0.0;
  return std::pow(1.0 - std::pow(sh, -4.0), 0.125);
}

TsolResult time_to_equilibrium(double m_init, double beta, std::uint64_t seed,
                               const TsolOptions& options) {
  const double target = onsager_magnetization(beta);
  IsingLattice lat = IsingLattice::random_with_magnetization(options.side, m_init, seed);
  Rng rng(Rng::mix(seed, 0x7501ull));
  std::vector<double> window(options.window, 0.0);
  double window_sum = 0.0;
  int filled = 0;
  for (int t = 1; t <= options.cap; ++t) {
    lat.metropolis_sweep(beta, rng);
    const double m = std::abs(lat.magnetization());
    const int slot = (t - 1) % options.window;
    if (filled < options.window) {
      window[slot] = m;
      window_sum += m;
      ++filled;
    } else {
      window_sum += m - window[slot];
      window[slot] = m;
    }
    if (filled >= options.window) {
      const double mean = window_sum / options.window;
      if (std::abs(mean - target) < options.eps) return {t, false};
    }
  }
  return {options.cap, true};
}

double ising_al_objective(double m_init, double beta, std::uint64_t seed, int n_seeds,
                          const TsolOptions& options) {
  double total = 0.0;
  for (int i = 0; i < n_seeds; ++i)
    total += time_to_equilibrium(m_init, beta, Rng::mix(seed, 0xa10 + i), options).sweeps;
  return -total / n_seeds;
}

MagnetizationStats sample_magnetization(double beta, double m_init, int burn_in_sweeps,
                                        int sample_sweeps, std::uint64_t seed, int side) {
  IsingLattice lat = IsingLattice::random_with_magnetization(side, m_init, seed);
  Rng rng(Rng::mix(seed, 0x3a9ull));
  for (int t = 0; t < burn_in_sweeps; ++t) lat.metropolis_sweep(beta, rng);
  MagnetizationStats stats;
  for (int t = 0; t < sample_sweeps; ++t) {
    lat.metropolis_sweep(beta, rng);
    const double m = lat.magnetization();
    stats.mean_m += m;
    stats.mean_abs_m += std::abs(m);
  }
  stats.mean_m /= sample_sweeps;
  stats.mean_abs_m /= sample_sweeps;
  return stats;
}

}  // namespace sdlab::ex
