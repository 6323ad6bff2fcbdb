#include <doctest.h>

#include <cmath>

#include "sdlab/active_learning.hpp"
#include "sdlab/photonics.hpp"

using namespace sdlab::opt;

TEST_SUITE_BEGIN("active_learning");

namespace {

double sphere_neg(const std::vector<double>& z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return -s;
}

}  // namespace

TEST_CASE("constant objective runs to budget without crashing") {
  const Bounds b = symmetric_box(2, 3.0);
  const auto res = al_loop([](const std::vector<double>&) { return 1.25; }, 2, b, 5, 12,
                           AcquisitionSpec::ei(), 3);
  CHECK(res.records.size() == 12);
  CHECK(res.best_y == doctest::Approx(1.25));
}

TEST_CASE("budget accounting is exact and best-so-far is monotone") {
  const Bounds b = symmetric_box(2, 3.0);
  const auto res = al_loop(sphere_neg, 2, b, 8, 30, AcquisitionSpec::ei(), 17);
  CHECK(res.records.size() == 30);
  CHECK(res.best_so_far.size() == 30);
  for (std::size_t i = 1; i < res.best_so_far.size(); ++i)
    CHECK(res.best_so_far[i] >= res.best_so_far[i - 1]);
  CHECK(res.best_y == res.best_so_far.back());
  CHECK(res.records[res.best_index].y == res.best_y);
}

TEST_CASE("fixed seed reproduces the full record list bit-exactly") {
  const Bounds b = symmetric_box(2, 3.0);
  const auto a = al_loop(sphere_neg, 2, b, 6, 22, AcquisitionSpec::ei(), 9);
  const auto c = al_loop(sphere_neg, 2, b, 6, 22, AcquisitionSpec::ei(), 9);
  REQUIRE(a.records.size() == c.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].y == c.records[i].y);
    for (std::size_t j = 0; j < 2; ++j) CHECK(a.records[i].z[j] == c.records[i].z[j]);
  }
  const auto d = al_loop(sphere_neg, 2, b, 6, 22, AcquisitionSpec::ei(), 10);
  bool differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) differs = differs || a.records[i].y != d.records[i].y;
  CHECK(differs);
}

TEST_CASE("non-finite objective values are flagged and excluded") {
  const Bounds b = symmetric_box(1, 3.0);
  int calls = 0;
  auto objective = [&calls](const std::vector<double>& z) {
    ++calls;
    if (calls % 4 == 0) return std::nan("");
    return -z[0] * z[0];
  };
  const auto res = al_loop(objective, 1, b, 5, 15, AcquisitionSpec::ei(), 2);
  CHECK(res.records.size() == 15);  // failures still consume budget
  CHECK(res.n_failed > 0);
  for (const auto& r : res.records)
    if (!r.ok) CHECK(r.y == 0.0);
}

TEST_CASE("al finds the sphere optimum quickly") {
  const Bounds b = symmetric_box(2, 3.0);
  const auto res = al_loop(sphere_neg, 2, b, 10, 40, AcquisitionSpec::ei(), 4);
  CHECK(res.best_y > -0.05);
}

TEST_CASE("ucb acquisition also improves over the initial design") {
  const Bounds b = symmetric_box(2, 3.0);
  const auto res = al_loop(sphere_neg, 2, b, 10, 40, AcquisitionSpec::ucb(0.5), 4);
  double best_init = -1e300;
  for (std::size_t i = 0; i < 10; ++i) best_init = std::max(best_init, res.records[i].y);
  CHECK(res.best_y >= best_init);
  CHECK(res.best_y > -0.1);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("differential_evolution");

TEST_CASE("sphere optimum within 1e-2 by budget exhaustion") {
  const Bounds b = symmetric_box(4, 3.0);
  const auto res = de_optimize(sphere_neg, 4, b, 40, 6000, 12);
  CHECK(res.best_y > -1e-2);
}

TEST_CASE("pop == budget returns the best of the initial population") {
  const Bounds b = symmetric_box(3, 3.0);
  const auto res = de_optimize(sphere_neg, 3, b, 25, 25, 7);
  CHECK(res.records.size() == 25);
  CHECK(res.best_per_generation.size() == 1);
  double best = -1e300;
  for (const auto& r : res.records) best = std::max(best, r.y);
  CHECK(res.best_y == best);
}

TEST_CASE("history of best-so-far per generation is monotone") {
  const Bounds b = symmetric_box(2, 3.0);
  const auto res = de_optimize(sphere_neg, 2, b, 20, 400, 3);
  for (std::size_t i = 1; i < res.best_per_generation.size(); ++i)
    CHECK(res.best_per_generation[i] >= res.best_per_generation[i - 1]);
}

TEST_CASE("non-finite objective handling mirrors the al loop") {
  const Bounds b = symmetric_box(2, 3.0);
  int calls = 0;
  auto objective = [&calls](const std::vector<double>& z) {
    ++calls;
    if (calls % 7 == 0) return std::numeric_limits<double>::infinity();
    return -z[0] * z[0] - z[1] * z[1];
  };
  const auto res = de_optimize(objective, 2, b, 10, 100, 21);
  CHECK(res.records.size() == 100);
  CHECK(res.n_failed > 0);
  CHECK(std::isfinite(res.best_y));
}

TEST_SUITE_END();
