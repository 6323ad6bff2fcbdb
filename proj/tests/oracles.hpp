#pragma once

// Test-side reference implementations, kept independent of the library
// code paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sdlab/autodiff.hpp"

namespace oracles {

// Central finite differences of a scalar-valued function of a flat
// parameter vector.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b,
                            double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

// Dense GP posterior by a direct solve (no Cholesky), Matern 5/2 kernel,
// constant prior mean.
struct DensePosterior {
  double mean;
  double sd;
};

inline DensePosterior dense_gp_posterior(const std::vector<std::vector<double>>& xs,
                                         const std::vector<double>& ys, double signal_var,
                                         double lengthscale, double noise_var, double prior_mean,
                                         const std::vector<double>& query) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  auto kernel = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    const double r = std::sqrt(s);
    const double t = std::sqrt(5.0) * r / lengthscale;
    return signal_var * (1.0 + t + 5.0 * r * r / (3.0 * lengthscale * lengthscale)) * std::exp(-t);
  };
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel(xs[i], xs[j]);
  K.diagonal().array() += noise_var;
  Eigen::VectorXd k(n), r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i) = kernel(query, xs[i]);
    r(i) = ys[i] - prior_mean;
  }
  const Eigen::VectorXd sol = K.fullPivLu().solve(r);
  const Eigen::VectorXd ksol = K.fullPivLu().solve(k);
  const double mu = prior_mean + k.dot(sol);
  const double var = signal_var - k.dot(ksol);
  return {mu, std::sqrt(std::max(0.0, var))};
}

// Least-squares fit by Eigen QR, for cross-checking coefficient refits.
inline std::vector<double> dense_least_squares(const std::vector<std::vector<double>>& rows,
                                               const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd A(n, m);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = rows[i][j];
    b(i) = y[i];
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + m};
}

// Direct (non-gray-code) Sobol construction from binary digits of the
// index, dimension 1 and 2 only; enough to pin the sequence головы.
inline std::vector<double> sobol_reference_point(std::uint32_t index) {
  // dim 1: van der Corput in base 2; dim 2: XOR of direction numbers with
  // m = 1, 3, 5, 15, ... (s=1, a=0 recurrence)
  std::uint32_t v1[32], v2[32];
  std::uint32_t m_prev = 1;
  for (int k = 0; k < 32; ++k) {
    v1[k] = 1u << (31 - k);
    if (k == 0) {
      v2[k] = 1u << 31;
    } else {
      m_prev = (m_prev << 1) ^ m_prev;
      v2[k] = m_prev << (31 - k);
    }
  }
  std::uint32_t x1 = 0, x2 = 0;
  for (int k = 0; k < 32; ++k)
    if ((index >> k) & 1u) {
      x1 ^= v1[k];
      x2 ^= v2[k];
    }
  return {x1 * 0x1.0p-32, x2 * 0x1.0p-32};
}

}  // namespace oracles
