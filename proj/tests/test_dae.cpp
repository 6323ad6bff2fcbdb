#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sdlab/dae.hpp"
#include "sdlab/rng.hpp"

using namespace sdlab;
using namespace sdlab::dae;

TEST_SUITE_BEGIN("dae");

TEST_CASE("attribute extractors on simple shapes") {
  const std::vector<double> constant(16, 3.5);
  CHECK(extract_attribute(constant, Attribute::Slope) == doctest::Approx(0.0));
  CHECK(extract_attribute(constant, Attribute::Curvature) == doctest::Approx(0.0));
  CHECK(extract_attribute(constant, Attribute::Amplitude) == doctest::Approx(16 * 3.5));

  std::vector<double> ramp(10);
  for (int i = 0; i < 10; ++i) ramp[i] = 2.0 * i;
  CHECK(extract_attribute(ramp, Attribute::Slope) == doctest::Approx(2.0));
  CHECK(extract_attribute(ramp, Attribute::Curvature) == doctest::Approx(0.0));

  CHECK_THROWS_AS(attribute_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("max-frequency attribute: DFT bin of a pure tone") {
  const int n = 864;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(2.0 * M_PI * 5.0 * i / n);
  CHECK(extract_attribute(x, Attribute::MaxFrequency) == doctest::Approx(5.0));
  // silence sits below the noise floor
  CHECK(extract_attribute(std::vector<double>(64, 0.0), Attribute::MaxFrequency) ==
        doctest::Approx(0.0));
}

TEST_CASE("extractors are pure: bit-identical on repeat calls") {
  Rng rng(5);
  std::vector<double> x(77);
  for (auto& v : x) v = rng.uniform(-2, 2);
  for (Attribute a : {Attribute::Slope, Attribute::Curvature, Attribute::Amplitude,
                      Attribute::MaxFrequency, Attribute::InitialVelocity}) {
    const double v1 = extract_attribute(x, a);
    const double v2 = extract_attribute(x, a);
    CHECK(v1 == v2);
  }
}

TEST_CASE("dist loss hand-computed pair value") {
  // batch {(z=0.5, a=1), (z=-0.5, a=0)}: two ordered pairs, each
  // (tanh(1) - 1)^2
  const std::vector<std::vector<double>> z{{0.5}, {-0.5}};
  const std::vector<std::vector<double>> a{{1.0}, {0.0}};
  const std::vector<RegularizedPair> pairs{{0, Attribute::Slope}};
  const double expected = std::pow(std::tanh(1.0) - 1.0, 2.0);
  CHECK(dist_loss(z, a, pairs) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(dist_loss(z, a, pairs) == doctest::Approx(0.05684).epsilon(1e-3));
}

TEST_CASE("dist loss: equal attributes pull latents together") {
  const std::vector<std::vector<double>> a{{2.0}, {2.0}, {2.0}};
  const std::vector<RegularizedPair> pairs{{0, Attribute::Slope}};
  const double spread = dist_loss({{1.0}, {0.0}, {-1.0}}, a, pairs);
  const double tight = dist_loss({{0.01}, {0.0}, {-0.01}}, a, pairs);
  CHECK(tight < spread);
  CHECK(dist_loss({{0.0}, {0.0}, {0.0}}, a, pairs) == doctest::Approx(0.0));
}

TEST_CASE("dist loss: saturated ordered pair approaches zero") {
  const std::vector<std::vector<double>> z{{30.0}, {-30.0}};
  const std::vector<std::vector<double>> a{{1.0}, {0.0}};
  CHECK(dist_loss(z, a, {{0, Attribute::Slope}}) < 1e-10);
}

TEST_CASE("dist loss is symmetric under batch permutation") {
  Rng rng(31);
  std::vector<std::vector<double>> z, a;
  for (int i = 0; i < 12; ++i) {
    z.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    a.push_back({rng.uniform(-1, 1)});
  }
  const std::vector<RegularizedPair> pairs{{1, Attribute::Slope}};
  const double base = dist_loss(z, a, pairs);
  std::vector<std::size_t> perm(12);
  for (std::size_t i = 0; i < 12; ++i) perm[i] = i;
  for (int rep = 0; rep < 10; ++rep) {
    for (std::size_t i = 12; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
    std::vector<std::vector<double>> zp, ap;
    for (std::size_t i : perm) {
      zp.push_back(z[i]);
      ap.push_back(a[i]);
    }
    CHECK(dist_loss(zp, ap, pairs) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("spearman: monotone pairs, ties, and hand value") {
  CHECK(spearman({1, 2, 3, 4, 5}, {10, 20, 30, 40, 50}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4, 5}, {50, 40, 30, 20, 10}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(spearman({1, 1, 1}, {1, 2, 3}), std::domain_error);
  CHECK_THROWS_AS(spearman({1.0}, {2.0}), std::invalid_argument);
  // average ranks for ties: monotone with a plateau stays strongly positive
  CHECK(spearman({1, 2, 2, 3}, {10, 20, 30, 40}) > 0.9);
}

TEST_CASE("savitzky-golay reproduces polynomials up to its order exactly") {
  std::vector<double> cubic(64);
  for (int i = 0; i < 64; ++i) {
    const double t = i * 0.1;
    cubic[i] = 1.0 - 0.5 * t + 0.25 * t * t - 0.03 * t * t * t;
  }
  const auto smoothed = savitzky_golay(cubic, 11, 3);
  for (int i = 0; i < 64; ++i) CHECK(smoothed[i] == doctest::Approx(cubic[i]).epsilon(1e-9));
  // and damps white noise
  Rng rng(9);
  std::vector<double> noisy = cubic;
  double in_power = 0.0;
  for (auto& v : noisy) {
    const double n = 0.1 * rng.normal();
    v += n;
    in_power += n * n;
  }
  const auto cleaned = savitzky_golay(noisy, 11, 3);
  double out_power = 0.0;
  for (int i = 0; i < 64; ++i) out_power += std::pow(cleaned[i] - cubic[i], 2.0);
  CHECK(out_power < 0.6 * in_power);
  CHECK_THROWS_AS(savitzky_golay(cubic, 10, 3), std::invalid_argument);
}

TEST_CASE("training: regularized latent orders by the attribute") {
  // synthetic experiments: scaled bumps whose amplitude is the attribute
  Rng rng(77);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 160; ++i) {
    const double amp = rng.uniform(0.2, 1.0);
    const double width = rng.uniform(8.0, 14.0);
    std::vector<double> x(32);
    for (int k = 0; k < 32; ++k) x[k] = amp * std::exp(-std::pow((k - 16.0) / width, 2.0));
    xs.push_back(std::move(x));
    ys.push_back(amp);
  }
  DaeSpec spec;
  spec.input_dim = 32;
  spec.latent_dim = 2;
  spec.hidden = {24};
  spec.pairs = {{0, Attribute::Amplitude}};
  auto res = train_dae(spec, xs, ys, 600, 3);
  CHECK(res.spearman_per_pair[0] >= 0.9);
  CHECK(res.distilled.size() == xs.size());
  CHECK(res.correlation_ok);
}

TEST_CASE("gamma 0 reduces to a plain autoencoder") {
  Rng rng(13);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 120; ++i) {
    const double amp = rng.uniform(0.2, 1.0);
    std::vector<double> x(16);
    for (int k = 0; k < 16; ++k) x[k] = amp * (1.0 + 0.2 * std::sin(0.5 * k));
    xs.push_back(std::move(x));
    ys.push_back(amp);
  }
  DaeSpec plain;
  plain.input_dim = 16;
  plain.latent_dim = 2;
  plain.hidden = {12};
  plain.pairs = {};  // nothing regularized
  plain.dist_weight = 0.0;
  auto res = train_dae(plain, xs, ys, 300, 3);
  CHECK(res.spearman_per_pair.empty());
  CHECK(res.loss_history.back() < res.loss_history.front());
}

TEST_CASE("regularization keeps reconstruction within 2x of the plain autoencoder") {
  Rng rng(29);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 150; ++i) {
    const double amp = rng.uniform(0.2, 1.0);
    const double shift = rng.uniform(-4.0, 4.0);
    std::vector<double> x(24);
    for (int k = 0; k < 24; ++k)
      x[k] = amp * std::exp(-std::pow((k - 12.0 - shift) / 5.0, 2.0));
    xs.push_back(std::move(x));
    ys.push_back(amp);
  }
  auto recon_mse = [&](const DaeParams& p) {
    double total = 0.0;
    for (const auto& x : xs) {
      const auto r = dae_decode(p, dae_encode(p, x));
      double se = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) se += (r[k] - x[k]) * (r[k] - x[k]);
      total += se / x.size();
    }
    return total / xs.size();
  };
  DaeSpec reg;
  reg.input_dim = 24;
  reg.latent_dim = 2;
  reg.hidden = {20};
  reg.pairs = {{0, Attribute::Amplitude}};
  reg.dist_weight = 1.0;
  DaeSpec plain = reg;
  plain.pairs = {};
  plain.dist_weight = 0.0;
  const auto fit_reg = train_dae(reg, xs, ys, 500, 3);
  const auto fit_plain = train_dae(plain, xs, ys, 500, 3);
  CHECK(recon_mse(fit_reg.params) <= 2.0 * recon_mse(fit_plain.params));
}

TEST_CASE("spec guards: small batches and duplicate latent indices") {
  DaeSpec bad;
  bad.input_dim = 8;
  bad.latent_dim = 2;
  bad.hidden = {6};
  bad.pairs = {{0, Attribute::Slope}, {0, Attribute::Amplitude}};
  CHECK_THROWS_AS(make_dae(bad, 1), std::invalid_argument);
  CHECK_THROWS_AS(dist_loss({{0.1}}, {{0.2}}, {{0, Attribute::Slope}}), std::invalid_argument);
  DaeSpec ok;
  ok.input_dim = 8;
  ok.latent_dim = 2;
  ok.hidden = {6};
  std::vector<std::vector<double>> few(10, std::vector<double>(8, 0.1));
  std::vector<double> y(10, 0.0);
  CHECK_THROWS_AS(train_dae(ok, few, y, 10, 1), std::invalid_argument);
}

TEST_SUITE_END();
