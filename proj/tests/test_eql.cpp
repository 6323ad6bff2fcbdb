#include <doctest.h>

#include <cmath>

#include "sdlab/eql.hpp"
#include "sdlab/rng.hpp"

using namespace sdlab;
using namespace sdlab::eql;

TEST_SUITE_BEGIN("expr");

TEST_CASE("polynomial algebra and canonicalization") {
  const Polynomial x = Polynomial::variable(0);
  const Polynomial y = Polynomial::variable(1);
  // (x + 2)(x - 2) = x^2 - 4
  const auto a = poly_add(x, Polynomial::constant(2.0));
  const auto b = poly_add(x, Polynomial::constant(-2.0));
  const auto prod = poly_mul(a, b);
  SymbolicExpr e{prod, {"x", "y"}};
  CHECK(e.term_count() == 2);
  for (double v : {-1.5, 0.0, 0.7, 2.3})
    CHECK(e.eval({v, 0.0}) == doctest::Approx(v * v - 4.0).epsilon(1e-12));
  // x * x^2 merges into x^3
  const auto cube = poly_mul(x, poly_mul(x, x));
  CHECK(cube.terms.size() == 1);
  CHECK(cube.terms[0].key() == "x0^3");
  // constants fold through functions
  const auto folded = poly_func(Fn::Sinh, Polynomial::constant(0.5));
  CHECK(folded.is_constant());
  CHECK(folded.constant_value() == doctest::Approx(std::sinh(0.5)));
}

TEST_CASE("term explosion guard") {
  Polynomial many;
  for (int i = 0; i < 40; ++i) {
    Polynomial v = Polynomial::variable(i);
    many = poly_add(many, v, 10000);
  }
  CHECK_THROWS_AS(poly_mul(poly_mul(many, many, 10000), many, 200), std::runtime_error);
}

TEST_CASE("display formatting uses 4 significant digits and degree order") {
  Polynomial p;
  p = poly_add(p, poly_scale(poly_mul(Polynomial::variable(0), Polynomial::variable(0)), 0.0467));
  p = poly_add(p, poly_scale(Polynomial::variable(0), -0.175));
  p = poly_add(p, Polynomial::constant(2.707));
  SymbolicExpr e{p, {"z1"}};
  CHECK(e.to_string() == "0.0467*z1^2 - 0.175*z1 + 2.707");
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("eql");

namespace {

Dataset linear_dataset(std::uint64_t seed, int n = 120) {
  Rng rng(seed);
  Dataset d;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-2, 2);
    d.X.push_back({x});
    d.y.push_back(x);
  }
  return d;
}

}  // namespace

TEST_CASE("fit_baseline: representable targets fit to near zero") {
  auto data = linear_dataset(3, 200);
  const auto res = fit_baseline(data, 3, 600);
  CHECK(res.val_mse < 1e-2);
  Dataset constant;
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    constant.X.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    constant.y.push_back(4.2);
  }
  CHECK(fit_baseline(constant, 5, 2500).val_mse < 5e-3);
  Dataset tiny;
  tiny.X.push_back({0.0});
  tiny.y.push_back(0.0);
  CHECK_THROWS_AS(fit_baseline(tiny, 1, 10), std::invalid_argument);
}

TEST_CASE("balance_dataset: quantile arithmetic on a uniform spread") {
  Dataset rows;
  for (int i = 0; i < 200; ++i) {
    rows.X.push_back({static_cast<double>(i)});
    rows.y.push_back(static_cast<double>(i));
  }
  const auto out = balance_dataset(rows, 0.8, 0.05, 2);
  // ~5% dropped, ~20% duplicated once: 200 - 10 + 40 give or take ties
  CHECK(out.size() >= 220);
  CHECK(out.size() <= 240);
  double lo = 1e300;
  for (double y : out.y) lo = std::min(lo, y);
  CHECK(lo >= 9.0);  // the bottom quantile is gone
  Dataset single;
  single.X.push_back({1.0});
  single.y.push_back(1.0);
  CHECK_THROWS_AS(balance_dataset(single), std::invalid_argument);
}

TEST_CASE("connection contribution: value-aware ranking") {
  MaskedLinear layer;
  layer.W = nd::Tensor(2, 1);
  layer.W.at(0, 0) = 0.01;  // small weight, large upstream value
  layer.W.at(1, 0) = 0.5;   // big weight, unit upstream value
  layer.b = nd::Tensor(1, 1);
  layer.mask.assign(3, 1);
  std::vector<std::vector<double>> batch(10, {100.0, 1.0});
  const auto scores = connection_contribution(layer, batch);
  CHECK(scores[0] == doctest::Approx(1.0));   // 0.01 * 100
  CHECK(scores[1] == doctest::Approx(0.5));
  CHECK(scores[0] > scores[1]);
  CHECK(scores[2] == doctest::Approx(0.0));   // zero bias
  // zero weight and dead upstream both score zero
  layer.W.at(0, 0) = 0.0;
  CHECK(connection_contribution(layer, batch)[0] == 0.0);
  std::vector<std::vector<double>> dead(10, {0.0, 1.0});
  layer.W.at(0, 0) = 5.0;
  CHECK(connection_contribution(layer, dead)[0] == 0.0);
}

TEST_CASE("spec validation guards") {
  EqlSpec bad;
  bad.n_inputs = 1;
  bad.layer1 = {Unit::Identity};
  bad.layer2 = {Unit::Sin};  // periodic units must stay in layer 1
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.layer2 = {Unit::Identity};
  bad.target_sparsity = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("mask monotonicity: zeros never revive through the loop") {
  auto data = linear_dataset(7, 150);
  EqlSpec spec;
  spec.n_inputs = 1;
  spec.layer1 = {Unit::Identity, Unit::Identity, Unit::Square};
  spec.layer2 = {Unit::Identity, Unit::Identity};
  spec.target_sparsity = 0.6;
  EqlTrainOptions opt;
  opt.init_epochs = 200;
  const auto res = train_prune_loop(spec, data, 7, opt);
  CHECK(res.history.size() > 1);  // pruning rounds actually happened
  // every masked connection holds an exact zero weight
  auto check_layer = [](const MaskedLinear& l) {
    for (std::size_t i = 0; i < l.W.size(); ++i)
      if (!l.mask[i]) CHECK(l.W[i] == 0.0);
    for (std::size_t j = 0; j < l.b.size(); ++j)
      if (!l.mask[l.W.size() + j]) CHECK(l.b[j] == 0.0);
  };
  check_layer(res.net.l1);
  check_layer(res.net.l2);
  check_layer(res.net.out);
  CHECK(res.net.sparsity() > 0.1);
  // sparsity accounting is exact
  std::size_t masked = 0;
  for (const auto* l : {&res.net.l1, &res.net.l2, &res.net.out})
    for (auto m : l->mask) masked += m ? 0 : 1;
  CHECK(res.net.sparsity() ==
        doctest::Approx(static_cast<double>(masked) / res.net.total_weights()));
}

TEST_CASE("already-sparse start returns immediately") {
  auto data = linear_dataset(9, 150);
  EqlSpec spec;
  spec.n_inputs = 1;
  spec.layer1 = {Unit::Identity, Unit::Identity};
  spec.layer2 = {Unit::Identity};
  spec.target_sparsity = 0.5;
  EqlNetwork warm = make_eql(spec, 9);
  // pre-masked beyond the target: the loop must run zero rounds
  for (auto* l : {&warm.l1, &warm.l2, &warm.out}) {
    for (std::size_t i = 1; i < l->mask.size(); ++i) l->mask[i] = 0;
    l->apply_mask();
  }
  REQUIRE(warm.sparsity() >= 0.5);
  EqlTrainOptions opt;
  opt.init_epochs = 100;
  opt.final_polish_epochs = 0;
  opt.warm_start = &warm;
  const auto res = train_prune_loop(spec, data, 9, opt);
  CHECK(res.history.size() == 1);  // the initial state only
  CHECK(res.net.sparsity() == warm.sparsity());
  for (std::size_t i = 0; i < warm.l1.mask.size(); ++i)
    CHECK(res.net.l1.mask[i] == warm.l1.mask[i]);
}

TEST_CASE("same seed gives identical mask history") {
  auto data = linear_dataset(11, 150);
  EqlSpec spec;
  spec.n_inputs = 1;
  spec.layer1 = {Unit::Identity, Unit::Square, Unit::Product};
  spec.layer2 = {Unit::Identity, Unit::Identity};
  spec.target_sparsity = 0.7;
  EqlTrainOptions opt;
  opt.init_epochs = 150;
  const auto a = train_prune_loop(spec, data, 11, opt);
  const auto b = train_prune_loop(spec, data, 11, opt);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].sparsity == b.history[i].sparsity);
    CHECK(a.history[i].val_mse == b.history[i].val_mse);
  }
  for (std::size_t i = 0; i < a.net.l1.mask.size(); ++i)
    CHECK(a.net.l1.mask[i] == b.net.l1.mask[i]);
}

TEST_CASE("readout: composition of scale, square, and output weight") {
  // single path: x -> (2x)^2 -> *3 gives 12 x^2
  EqlSpec spec;
  spec.n_inputs = 1;
  spec.layer1 = {Unit::Square};
  spec.layer2 = {Unit::Identity};
  EqlNetwork net = make_eql(spec, 1);
  net.l1.W.at(0, 0) = 2.0;
  net.l1.b.at(0, 0) = 0.0;
  net.l2.W.at(0, 0) = 1.0;
  net.l2.b.at(0, 0) = 0.0;
  net.out.W.at(0, 0) = 3.0;
  net.out.b.at(0, 0) = 0.0;
  const auto expr = readout_equation(net, {"x"});
  CHECK(expr.term_count() == 1);
  CHECK(expr.to_string() == "12*x^2");
  // all-zero network reads out as the output bias
  EqlNetwork zero = make_eql(spec, 2);
  for (auto* l : {&zero.l1, &zero.l2, &zero.out}) {
    for (std::size_t i = 0; i < l->W.size(); ++i) l->W[i] = 0.0;
    for (std::size_t j = 0; j < l->b.size(); ++j) l->b[j] = 0.0;
  }
  zero.out.b.at(0, 0) = -1.25;
  const auto zexpr = readout_equation(zero, {"x"});
  CHECK(zexpr.eval({123.0}) == doctest::Approx(-1.25));
}

TEST_CASE("readout fidelity on random sparse networks") {
  Rng rng(41);
  for (int rep = 0; rep < 6; ++rep) {
    EqlSpec spec;
    spec.n_inputs = 3;
    spec.layer1 = {Unit::Identity, Unit::Square, Unit::Product, Unit::Sin, Unit::Identity};
    spec.layer2 = {Unit::Identity, Unit::Product, Unit::Identity};
    EqlNetwork net = make_eql(spec, 100 + rep);
    // sparsify 85% of connections at random
    for (auto* l : {&net.l1, &net.l2, &net.out}) {
      for (std::size_t i = 0; i < l->mask.size(); ++i)
        if (rng.uniform() < 0.85) l->mask[i] = 0;
      l->apply_mask();
    }
    const auto expr = readout_equation(net, {"a", "b", "c"});
    for (int probe = 0; probe < 1000; ++probe) {
      const std::vector<double> x{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      CHECK(std::abs(expr.eval(x) - net.predict(x)) <= 1e-9);
    }
  }
}

TEST_CASE("simplify: drops numerical dust, keeps load-bearing terms") {
  Rng rng(51);
  Dataset data;
  for (int i = 0; i < 300; ++i) {
    const double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
    data.X.push_back({x, y});
    data.y.push_back(2.0 * x * y - 0.7 * x);
  }
  Polynomial p;
  p = poly_add(p, poly_scale(poly_mul(Polynomial::variable(0), Polynomial::variable(1)), 2.0));
  p = poly_add(p, poly_scale(Polynomial::variable(0), -0.7));
  p = poly_add(p, poly_scale(Polynomial::variable(1), 1e-12));  // dust
  SymbolicExpr expr{p, {"x", "y"}};
  const auto simplified = simplify_equation(expr, data);
  CHECK(simplified.term_count() == 2);
  CHECK(dataset_mse(simplified, data) < 1e-20);

  // every term load-bearing: nothing is dropped
  Dataset full;
  for (int i = 0; i < 300; ++i) {
    const double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
    full.X.push_back({x, y});
    full.y.push_back(1.5 * x + 2.5 * y * y - 3.0);
  }
  Polynomial q;
  q = poly_add(q, poly_scale(Polynomial::variable(0), 1.5));
  q = poly_add(q, poly_scale(poly_mul(Polynomial::variable(1), Polynomial::variable(1)), 2.5));
  q = poly_add(q, Polynomial::constant(-3.0));
  const auto kept = simplify_equation({q, {"x", "y"}}, full);
  CHECK(kept.term_count() == 3);
}

TEST_CASE("simplify never raises the error beyond its budget (property)") {
  Rng rng(61);
  for (int rep = 0; rep < 8; ++rep) {
    Dataset data;
    for (int i = 0; i < 150; ++i) {
      const double x = rng.uniform(-2, 2);
      data.X.push_back({x});
      data.y.push_back(std::sin(1.3 * x) + 0.2 * x * x);
    }
    // an imperfect polynomial model of the data
    Polynomial p;
    for (int d = 0; d <= 4; ++d) {
      Polynomial term = Polynomial::constant(rng.uniform(-0.5, 0.5));
      for (int k = 0; k < d; ++k) term = poly_mul(term, Polynomial::variable(0));
      p = poly_add(p, term);
    }
    SymbolicExpr expr{p, {"x"}};
    SimplifyOptions opt;
    const auto before_fit = refit_coefficients(expr, data);
    const double mse_pre = dataset_mse(before_fit, data);
    const auto after = simplify_equation(expr, data, opt);
    double yvar = 0.0, ymean = 0.0;
    for (double v : data.y) ymean += v;
    ymean /= data.size();
    for (double v : data.y) yvar += (v - ymean) * (v - ymean);
    yvar /= data.size();
    const double budget = std::max((1.0 + opt.tol) * mse_pre, opt.floor_rel * yvar);
    CHECK(dataset_mse(after, data) <= budget * (1.0 + 1e-9));
    CHECK(after.term_count() <= expr.term_count());
  }
}

TEST_CASE("prune guard: a single-connection layer cannot be emptied") {
  EqlSpec spec;
  spec.n_inputs = 1;
  spec.layer1 = {Unit::Identity};
  spec.layer2 = {Unit::Identity};
  EqlNetwork net = make_eql(spec, 5);
  // collapse every layer to one active connection
  for (auto* l : {&net.l1, &net.l2, &net.out}) {
    for (std::size_t i = 1; i < l->mask.size(); ++i) l->mask[i] = 0;
    l->apply_mask();
  }
  const double before = net.sparsity();
  auto data = linear_dataset(5, 150);
  EqlTrainOptions opt;
  opt.init_epochs = 50;
  spec.target_sparsity = 0.99;
  // the loop stops without touching the last connections
  EqlResult res = train_prune_loop(spec, data, 5, opt);
  CHECK(res.net.sparsity() <= std::max(before, 0.99));
}

TEST_SUITE_END();
