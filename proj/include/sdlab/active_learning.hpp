#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdlab/gp.hpp"
#include "sdlab/sobol.hpp"

namespace sdlab::opt {

using Objective = std::function<double(const std::vector<double>&)>;

struct AlOptions {
  std::size_t candidates = 512;   // Sobol candidate pool per round
  std::size_t polish_top = 8;     // Nelder-Mead starts among top candidates
  std::size_t polish_iters = 60;  // NM iterations per start
  std::size_t refit_every = 10;   // hyperparameter refit cadence (rounds)
  double noise_var = 0.0;
};

struct AlResult {
  std::vector<ExperimentRecord> records;  // in evaluation order
  std::vector<double> best_so_far;        // running best y (maximization)
  std::size_t best_index = 0;
  std::vector<double> best_z;
  double best_y = 0.0;
  std::size_t n_failed = 0;  // non-finite objective returns
};

// Budgeted GP active-learning loop (maximization). Sobol initialization,
// per-round acquisition maximization over a Sobol candidate pool with
// Nelder-Mead polish of the top scorers, exact budget accounting.
AlResult al_loop(const Objective& objective, std::size_t d, const Bounds& bounds,
                 std::size_t n_init, std::size_t budget, const AcquisitionSpec& acq,
                 std::uint64_t seed, const AlOptions& options = {});

// Derivative-free simplex maximizer clipped to box bounds.
std::vector<double> nelder_mead_max(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, const Bounds& bounds,
                                    double step, std::size_t iters);

struct DeOptions {
  double weight = 0.8;     // differential weight F
  double crossover = 0.9;  // crossover rate CR
};

struct DeResult {
  std::vector<double> best_z;
  double best_y = 0.0;
  std::vector<double> best_per_generation;  // best-so-far after each generation
  std::vector<ExperimentRecord> records;    // every evaluation, in order
  std::size_t n_failed = 0;
};

// DE/rand/1/bin (maximization), Latin-hypercube initial population,
// out-of-bounds mutants clipped to the box.
DeResult de_optimize(const Objective& objective, std::size_t d, const Bounds& bounds,
                     std::size_t pop, std::size_t budget, std::uint64_t seed,
                     const DeOptions& options = {});

}  // namespace sdlab::opt
