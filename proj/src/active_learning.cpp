#include "sdlab/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdlab/rng.hpp"

namespace sdlab::opt {

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void clip_to(std::vector<double>& z, const Bounds& b) {
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], b.lo[i], b.hi[i]);
}

bool coincides_with_any(const std::vector<double>& z, const std::vector<ExperimentRecord>& recs) {
  for (const auto& r : recs)
    if (r.ok && sqdist(z, r.z) < 1e-18) return true;
  return false;
}

}  // namespace

std::vector<double> nelder_mead_max(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, const Bounds& bounds, double step,
                                    std::size_t iters) {
  const std::size_t d = start.size();
  struct Vertex {
    std::vector<double> x;
    double fx;
  };
  auto eval = [&](std::vector<double> x) {
    clip_to(x, bounds);
    const double v = f(x);
    return Vertex{std::move(x), v};
  };
  std::vector<Vertex> simplex;
  simplex.push_back(eval(start));
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> x = start;
    x[i] += step;
    simplex.push_back(eval(std::move(x)));
  }
  auto by_value_desc = [](const Vertex& a, const Vertex& b) { return a.fx > b.fx; };
  for (std::size_t it = 0; it < iters; ++it) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value_desc);
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t v = 0; v + 1 < simplex.size(); ++v) centroid[i] += simplex[v].x[i];
      centroid[i] /= static_cast<double>(d);
    }
    const Vertex& worst = simplex.back();
    std::vector<double> xr(d);
    for (std::size_t i = 0; i < d; ++i) xr[i] = centroid[i] + (centroid[i] - worst.x[i]);
    Vertex r = eval(xr);
    if (r.fx > simplex.front().fx) {
      std::vector<double> xe(d);
      for (std::size_t i = 0; i < d; ++i) xe[i] = centroid[i] + 2.0 * (centroid[i] - worst.x[i]);
      Vertex e = eval(xe);
      simplex.back() = e.fx > r.fx ? std::move(e) : std::move(r);
    } else if (r.fx > simplex[simplex.size() - 2].fx) {
      simplex.back() = std::move(r);
    } else {
      std::vector<double> xc(d);
      for (std::size_t i = 0; i < d; ++i) xc[i] = centroid[i] + 0.5 * (worst.x[i] - centroid[i]);
      Vertex c = eval(xc);
      if (c.fx > worst.fx) {
        simplex.back() = std::move(c);
      } else {
        // shrink toward the best vertex
        for (std::size_t v = 1; v < simplex.size(); ++v) {
          std::vector<double> xs(d);
          for (std::size_t i = 0; i < d; ++i)
            xs[i] = simplex[0].x[i] + 0.5 * (simplex[v].x[i] - simplex[0].x[i]);
          simplex[v] = eval(std::move(xs));
        }
      }
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_value_desc);
  return simplex.front().x;
}

AlResult al_loop(const Objective& objective, std::size_t d, const Bounds& bounds,
                 std::size_t n_init, std::size_t budget, const AcquisitionSpec& acq,
                 std::uint64_t seed, const AlOptions& options) {
  if (bounds.dim() != d) throw std::invalid_argument("al_loop: bounds dimension mismatch");
  if (budget <= n_init) throw std::invalid_argument("al_loop: budget must exceed n_init");

  AlResult out;
  out.best_y = -std::numeric_limits<double>::infinity();

  auto record = [&](const std::vector<double>& z) {
    const double y = objective(z);
    ExperimentRecord rec{z, y, std::isfinite(y)};
    if (!rec.ok) {
      rec.y = 0.0;
      ++out.n_failed;
    } else if (y > out.best_y) {
      out.best_y = y;
      out.best_z = z;
      out.best_index = out.records.size();
    }
    out.records.push_back(std::move(rec));
    out.best_so_far.push_back(out.best_y);
  };

  for (const auto& z : sobol_init(d, n_init, bounds, seed)) record(z);

  // candidate pool reused every round; the pool is deterministic, seed
  // variation enters through the initial design
  const auto candidates = sobol_init(d, options.candidates, bounds, 0);

  KernelParams kp;
  kp.noise_var = options.noise_var;
  bool have_params = false;

  while (out.records.size() < budget) {
    std::vector<ExperimentRecord> good;
    for (const auto& r : out.records)
      if (r.ok) good.push_back(r);
    if (good.empty()) {
      // nothing usable yet; spend budget on more quasi-random probes
      auto extra = sobol_init(d, 1, bounds, Rng::mix(seed, out.records.size()));
      record(extra[0]);
      continue;
    }

    const std::size_t round = out.records.size() - n_init;
    if (!have_params || round % options.refit_every == 0) {
      kp = fit_hyperparams(good, options.noise_var).params;
      have_params = true;
    }
    GpModel gp = GpModel::fit(good, kp);

    const double y_best = out.best_y;
    auto score_one = [&](const std::vector<double>& z) {
      return acq.kind == AcquisitionSpec::Kind::Ucb ? acquire_ucb(gp, z, acq.lambda)
                                                    : acquire_ei(gp, z, y_best);
    };

    const auto post = gp.posterior_batch(candidates);
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      scores[i] = acq.kind == AcquisitionSpec::Kind::Ucb
                      ? post[i].mean + acq.lambda * post[i].sd
                      : acquire_ei_from(post[i], y_best);
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    // ties break toward the lowest candidate index
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<double> pick;
    double pick_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& z = candidates[order[i]];
      if (coincides_with_any(z, out.records)) continue;
      pick = z;
      pick_score = scores[order[i]];
      break;
    }

    double span = 0.0;
    for (std::size_t i = 0; i < d; ++i) span = std::max(span, bounds.hi[i] - bounds.lo[i]);
    const std::size_t starts = std::min(options.polish_top, order.size());
    for (std::size_t s = 0; s < starts; ++s) {
      auto polished = nelder_mead_max(score_one, candidates[order[s]], bounds, 0.05 * span,
                                      options.polish_iters);
      if (coincides_with_any(polished, out.records)) continue;
      const double sc = score_one(polished);
      if (sc > pick_score) {
        pick_score = sc;
        pick = polished;
      }
    }

    if (pick.empty()) {
      // every candidate already sampled (tiny discrete spaces); fall back
      // to a fresh shifted Sobol point
      auto extra = sobol_init(d, 1, bounds, Rng::mix(seed, 7700 + out.records.size()));
      pick = extra[0];
    }
    record(pick);
  }
  return out;
}

DeResult de_optimize(const Objective& objective, std::size_t d, const Bounds& bounds,
                     std::size_t pop, std::size_t budget, std::uint64_t seed,
                     const DeOptions& options) {
  if (pop < 4) throw std::invalid_argument("de_optimize: population must be >= 4");
  if (budget < pop) throw std::invalid_argument("de_optimize: budget must cover the population");

  Rng rng(Rng::mix(seed, 0xdeull));
  DeResult out;
  out.best_y = -std::numeric_limits<double>::infinity();

  auto eval = [&](const std::vector<double>& z) {
    const double y = objective(z);
    const bool ok = std::isfinite(y);
    if (!ok) ++out.n_failed;
    out.records.push_back({z, ok ? y : 0.0, ok});
    if (ok && y > out.best_y) {
      out.best_y = y;
      out.best_z = z;
    }
    return ok ? y : -std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> x = latin_hypercube(d, pop, bounds, seed);
  std::vector<double> fx(pop);
  for (std::size_t i = 0; i < pop; ++i) fx[i] = eval(x[i]);
  out.best_per_generation.push_back(out.best_y);

  while (out.records.size() < budget) {
    for (std::size_t i = 0; i < pop && out.records.size() < budget; ++i) {
      std::size_t r1, r2, r3;
      do r1 = rng.uniform_int(pop); while (r1 == i);
      do r2 = rng.uniform_int(pop); while (r2 == i || r2 == r1);
      do r3 = rng.uniform_int(pop); while (r3 == i || r3 == r1 || r3 == r2);
      std::vector<double> trial = x[i];
      const std::size_t jrand = rng.uniform_int(d);
      for (std::size_t j = 0; j < d; ++j) {
        if (j == jrand || rng.uniform() < options.crossover) {
          double v = x[r1][j] + options.weight * (x[r2][j] - x[r3][j]);
          trial[j] = std::clamp(v, bounds.lo[j], bounds.hi[j]);
        }
      }
      const double ft = eval(trial);
      if (ft >= fx[i]) {
        x[i] = std::move(trial);
        fx[i] = ft;
      }
    }
    out.best_per_generation.push_back(out.best_y);
  }
  return out;
}

}  // namespace sdlab::opt
