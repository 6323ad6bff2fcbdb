#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sdlab/gp.hpp"
#include "sdlab/rng.hpp"
#include "sdlab/sobol.hpp"

using namespace sdlab;
using namespace sdlab::opt;

TEST_SUITE_BEGIN("gp");

TEST_CASE("matern 5/2 closed form") {
  KernelParams p{1.0, 1.0, 0.0};
  CHECK(matern52(0.0, p) == doctest::Approx(1.0));
  // sigma=1, l=1, r=1
  CHECK(matern52(1.0, p) == doctest::Approx(0.52399411).epsilon(1e-6));
  KernelParams p2{2.5, 0.7, 0.0};
  CHECK(matern52(0.0, p2) == doctest::Approx(2.5));
  // monotone decay to zero
  double prev = matern52(0.0, p);
  for (double r = 0.25; r < 20.0; r += 0.25) {
    const double v = matern52(r, p);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-8);
  CHECK_THROWS_AS(matern52(-0.1, p), std::invalid_argument);
}

TEST_CASE("single record: noiseless interpolation") {
  std::vector<ExperimentRecord> recs = {{{0.4, -1.2}, 5.0, true}};
  GpModel gp = GpModel::fit(recs, KernelParams{1.0, 1.0, 0.0}, 0.0);
  const Posterior p = gp.posterior({0.4, -1.2});
  CHECK(p.mean == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(p.sd < 1e-4);  // only the solver jitter remains
}

TEST_CASE("posterior mean interpolates every training point") {
  Rng rng(11);
  std::vector<ExperimentRecord> recs;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> z(4);
    for (auto& v : z) v = rng.uniform(-3, 3);
    recs.push_back({z, rng.uniform(-2, 2), true});
  }
  GpModel gp = GpModel::fit(recs, KernelParams{1.5, 1.2, 0.0});
  for (const auto& r : recs) {
    const Posterior p = gp.posterior(r.z);
    CHECK(p.mean == doctest::Approx(r.y).epsilon(1e-6));
    CHECK(p.sd * p.sd <= 1e-6);
  }
  CHECK(gp.factor_residual() < 1e-8);
}

TEST_CASE("posterior far from data reverts to the prior") {
  std::vector<ExperimentRecord> recs = {{{0.0, 0.0}, 1.0, true}, {{0.5, 0.2}, 1.4, true}};
  KernelParams kp{2.0, 0.4, 0.0};
  GpModel gp = GpModel::fit(recs, kp, 0.7);
  const Posterior p = gp.posterior({40.0, 40.0});
  CHECK(p.mean == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(p.sd == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("posterior matches a dense-solve oracle") {
  Rng rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    std::vector<ExperimentRecord> recs;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> z(3);
      for (auto& v : z) v = rng.uniform(-3, 3);
      const double y = rng.uniform(-1, 1);
      xs.push_back(z);
      ys.push_back(y);
      recs.push_back({z, y, true});
    }
    KernelParams kp{1.3, 0.9, 0.0};
    GpModel gp = GpModel::fit(recs, kp, 0.25);
    for (int q = 0; q < 8; ++q) {
      std::vector<double> z(3);
      for (auto& v : z) v = rng.uniform(-3, 3);
      const Posterior mine = gp.posterior(z);
      const auto ref = oracles::dense_gp_posterior(xs, ys, 1.3, 0.9, 0.0, 0.25, z);
      CHECK(mine.mean == doctest::Approx(ref.mean).epsilon(1e-8));
      CHECK(mine.sd == doctest::Approx(ref.sd).epsilon(1e-6));
    }
  }
}

TEST_CASE("posterior_batch agrees with single queries") {
  Rng rng(31);
  std::vector<ExperimentRecord> recs;
  for (int i = 0; i < 30; ++i) {
    std::vector<double> z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    recs.push_back({z, std::sin(z[0]) + 0.3 * z[1], true});
  }
  GpModel gp = GpModel::fit(recs, KernelParams{1.0, 0.8, 0.0});
  std::vector<std::vector<double>> queries;
  for (int i = 0; i < 40; ++i) queries.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
  const auto batch = gp.posterior_batch(queries);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const Posterior one = gp.posterior(queries[i]);
    CHECK(batch[i].mean == doctest::Approx(one.mean).epsilon(1e-11));
    CHECK(batch[i].sd == doctest::Approx(one.sd).epsilon(1e-9));
  }
}

TEST_CASE("incremental add_point matches a fresh fit") {
  Rng rng(47);
  std::vector<ExperimentRecord> recs;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    recs.push_back({z, z[0] * z[0] - z[1], true});
  }
  GpModel inc = GpModel::fit({recs.begin(), recs.begin() + 5}, KernelParams{1.0, 1.0, 0.0}, 0.0);
  for (int i = 5; i < 10; ++i) inc.add_point(recs[i].z, recs[i].y);
  GpModel full = GpModel::fit(recs, KernelParams{1.0, 1.0, 0.0}, 0.0);
  for (int q = 0; q < 10; ++q) {
    std::vector<double> z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Posterior a = inc.posterior(z), b = full.posterior(z);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-8));
    CHECK(a.sd == doctest::Approx(b.sd).epsilon(1e-6));
  }
}

TEST_CASE("duplicate inputs with zero noise are rejected") {
  std::vector<ExperimentRecord> recs = {{{1.0}, 2.0, true}, {{1.0}, 3.0, true}};
  CHECK_THROWS_AS(GpModel::fit(recs, KernelParams{1.0, 1.0, 0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("posterior variance never exceeds the prior variance") {
  Rng rng(61);
  std::vector<ExperimentRecord> recs;
  for (int i = 0; i < 25; ++i) {
    std::vector<double> z{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    recs.push_back({z, rng.normal(), true});
  }
  KernelParams kp{1.7, 1.1, 0.0};
  GpModel gp = GpModel::fit(recs, kp);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> z{rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-6, 6)};
    CHECK(gp.posterior(z).sd <= std::sqrt(kp.signal_var) + 1e-12);
  }
}

TEST_CASE("hyperparameter fit falls back on constant targets") {
  std::vector<ExperimentRecord> recs;
  for (int i = 0; i < 8; ++i) recs.push_back({{static_cast<double>(i), 0.5}, 4.0, true});
  const auto hp = fit_hyperparams(recs);
  CHECK(hp.fallback);
  CHECK(hp.params.lengthscale == doctest::Approx(median_pairwise_distance(
                                     {recs[0].z, recs[1].z, recs[2].z, recs[3].z, recs[4].z,
                                      recs[5].z, recs[6].z, recs[7].z})));
}

TEST_CASE("hyperparameter fit recovers a sensible lengthscale") {
  Rng rng(71);
  std::vector<ExperimentRecord> recs;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> z{rng.uniform(-3, 3)};
    recs.push_back({z, std::sin(2.0 * z[0]), true});
  }
  const auto hp = fit_hyperparams(recs);
  CHECK(!hp.fallback);
  CHECK(hp.params.lengthscale > 0.1);
  CHECK(hp.params.lengthscale < 5.0);
  // the fitted model should interpolate well between samples
  GpModel gp = GpModel::fit(recs, hp.params);
  double worst = 0.0;
  for (double z = -2.9; z <= 2.9; z += 0.11) {
    const double err = std::abs(gp.posterior({z}).mean - std::sin(2.0 * z));
    worst = std::max(worst, err);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("ucb: lambda 0 equals the posterior mean exactly") {
  std::vector<ExperimentRecord> recs = {{{0.0}, 1.0, true}, {{1.0}, 2.0, true}};
  GpModel gp = GpModel::fit(recs, KernelParams{1.0, 1.0, 0.0});
  for (double z = -2.0; z <= 3.0; z += 0.37)
    CHECK(acquire_ucb(gp, {z}, 0.0) == gp.posterior({z}).mean);
  // at a noiseless training point UCB equals the observation
  CHECK(acquire_ucb(gp, {1.0}, 2.0) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("ucb: direct substitution") {
  // mu + lambda sigma with (1.0, 0.25), lambda 2 -> 1.5
  Posterior p{1.0, 0.25};
  CHECK(p.mean + 2.0 * p.sd == doctest::Approx(1.5));
}

TEST_CASE("ei closed form and non-negativity") {
  CHECK(acquire_ei_from({0.0, 0.0}, 0.5) == 0.0);      // sd 0, mu below best
  CHECK(acquire_ei_from({1.0, 1.0}, 1.0) ==
        doctest::Approx(0.3989422804).epsilon(1e-9));  // phi(0)
  Rng rng(83);
  for (int i = 0; i < 10000; ++i) {
    const Posterior p{rng.uniform(-5, 5), rng.uniform(0, 3)};
    CHECK(acquire_ei_from(p, rng.uniform(-5, 5)) >= 0.0);
  }
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("sobol");

TEST_CASE("first four 2-d points match the standard sequence") {
  const auto pts = sobol_points(2, 4);
  const double expected[4][2] = {{0.5, 0.5}, {0.75, 0.25}, {0.25, 0.75}, {0.375, 0.375}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) CHECK(pts[i][j] == doctest::Approx(expected[i][j]).epsilon(1e-15));
}

TEST_CASE("gray-code order matches the direct binary construction") {
  SobolSequence seq(2);
  for (std::uint32_t k = 1; k <= 64; ++k) {
    const auto mine = seq.next();
    const std::uint32_t gray = k ^ (k >> 1);
    const auto ref = oracles::sobol_reference_point(gray);
    CHECK(mine[0] == doctest::Approx(ref[0]).epsilon(1e-15));
    CHECK(mine[1] == doctest::Approx(ref[1]).epsilon(1e-15));
  }
}

TEST_CASE("single point is the box center") {
  const Bounds b = symmetric_box(3, 3.0);
  const auto pts = sobol_init(3, 1, b, 0);
  for (double v : pts[0]) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("points respect bounds in every dimension, shifted or not") {
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    const Bounds b = symmetric_box(6, 3.0);
    for (const auto& p : sobol_init(6, 512, b, seed)) {
      REQUIRE(p.size() == 6);
      for (double v : p) {
        CHECK(v >= -3.0);
        CHECK(v < 3.0);
      }
    }
  }
}

TEST_CASE("first-dimension stratification holds for 256 points") {
  // every power-of-two prefix fills dyadic bins exactly once per bin
  const auto pts = sobol_points(1, 256);
  std::vector<int> bins(16, 0);
  for (int i = 0; i < 16; ++i) ++bins[static_cast<int>(pts[i][0] * 16) % 16];
  int filled = 0;
  for (int c : bins) filled += c > 0 ? 1 : 0;
  CHECK(filled >= 15);  // index offset leaves at most one doubled bin
}

TEST_CASE("latin hypercube: one sample per stratum") {
  const Bounds b = symmetric_box(3, 1.0);
  const auto pts = latin_hypercube(3, 32, b, 5);
  for (int j = 0; j < 3; ++j) {
    std::vector<int> counts(32, 0);
    for (const auto& p : pts) {
      const double u = (p[j] + 1.0) / 2.0;
      ++counts[std::min(31, static_cast<int>(u * 32))];
    }
    for (int c : counts) CHECK(c == 1);
  }
}

TEST_SUITE_END();
