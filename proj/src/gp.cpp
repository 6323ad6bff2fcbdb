#include "sdlab/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdlab::opt {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964091736687747;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// lower Cholesky of a row-major symmetric matrix; returns false if a pivot
// goes non-positive
bool cholesky_inplace(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (d <= 0.0 || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
    for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
  }
  return true;
}

void forward_solve(const std::vector<double>& L, std::size_t n, std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    const double* row = L.data() + i * n;
    for (std::size_t k = 0; k < i; ++k) s -= row[k] * b[k];
    b[i] = s / row[i];
  }
}

void backward_solve(const std::vector<double>& L, std::size_t n, std::vector<double>& b) {
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= L[k * n + i] * b[k];
    b[i] = s / L[i * n + i];
  }
}

}  // namespace

double matern52(double r, const KernelParams& p) {
  if (r < 0.0) throw std::invalid_argument("matern52: negative distance");
  const double t = kSqrt5 * r / p.lengthscale;
  return p.signal_var * (1.0 + t + 5.0 * r * r / (3.0 * p.lengthscale * p.lengthscale)) *
         std::exp(-t);
}

GpModel GpModel::fit(const std::vector<ExperimentRecord>& records, const KernelParams& params,
                     double prior_mean) {
  if (records.empty()) throw std::invalid_argument("gp_fit: no records");
  if (params.signal_var <= 0.0 || params.lengthscale <= 0.0 || params.noise_var < 0.0)
    throw std::invalid_argument("gp_fit: invalid kernel parameters");
  GpModel m;
  m.dim_ = records[0].z.size();
  m.params_ = params;
  m.mean_ = prior_mean;
  for (const auto& r : records) {
    if (!r.ok) continue;
    if (r.z.size() != m.dim_) throw std::invalid_argument("gp_fit: inconsistent dimensions");
    m.x_.push_back(r.z);
    m.y_.push_back(r.y);
  }
  if (m.x_.empty()) throw std::invalid_argument("gp_fit: no usable records");
  if (params.noise_var == 0.0) {
    for (std::size_t i = 0; i < m.x_.size(); ++i)
      for (std::size_t j = i + 1; j < m.x_.size(); ++j)
        if (distance(m.x_[i], m.x_[j]) < 1e-12)
          throw std::invalid_argument("gp_fit: duplicate inputs with zero noise");
  }
  m.rebuild();
  return m;
}

GpModel GpModel::fit(const std::vector<ExperimentRecord>& records, const KernelParams& params) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.ok) {
      s += r.y;
      ++n;
    }
  return fit(records, params, n ? s / static_cast<double>(n) : 0.0);
}

void GpModel::rebuild() {
  const std::size_t n = x_.size();
  std::vector<double> base(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i * n + i] = params_.signal_var + params_.noise_var;
    for (std::size_t j = 0; j < i; ++j) {
      const double k = matern52(distance(x_[i], x_[j]), params_);
      base[i * n + j] = k;
      base[j * n + i] = k;
    }
  }
  // escalate jitter until the factorization succeeds; the ladder scales
  // with the kernel diagonal so large-magnitude objectives behave like
  // unit-variance ones
  for (double jit : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    const double scaled = jit * (params_.signal_var + params_.noise_var);
    std::vector<double> a = base;
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += scaled;
    if (cholesky_inplace(a, n)) {
      chol_ = std::move(a);
      jitter_ = scaled;
      alpha_.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) alpha_[i] = y_[i] - mean_;
      forward_solve(chol_, n, alpha_);
      backward_solve(chol_, n, alpha_);
      return;
    }
  }
  throw std::runtime_error(
      "gp_fit: covariance not positive definite at max jitter; "
      "check for duplicate or degenerate inputs");
}

void GpModel::add_point(const std::vector<double>& z, double y) {
  if (z.size() != dim_) throw std::invalid_argument("gp add_point: dimension mismatch");
  const std::size_t n = x_.size();
  std::vector<double> k = kvec(z);
  // border update: L_new = [L 0; w^T l], l = sqrt(k_ss - w.w)
  std::vector<double> w = k;
  forward_solve(chol_, n, w);
  double d = params_.signal_var + params_.noise_var + jitter_;
  for (double wi : w) d -= wi * wi;
  x_.push_back(z);
  y_.push_back(y);
  if (d < 1e-12 * params_.signal_var) {
    rebuild();  // numerically tight; refactor from scratch with fresh jitter
    return;
  }
  const std::size_t m = n + 1;
  std::vector<double> grown(m * m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) grown[i * m + j] = chol_[i * n + j];
  for (std::size_t j = 0; j < n; ++j) grown[n * m + j] = w[j];
  grown[n * m + n] = std::sqrt(d);
  chol_ = std::move(grown);
  alpha_.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) alpha_[i] = y_[i] - mean_;
  forward_solve(chol_, m, alpha_);
  backward_solve(chol_, m, alpha_);
}

std::vector<double> GpModel::kvec(const std::vector<double>& z) const {
  std::vector<double> k(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) k[i] = matern52(distance(z, x_[i]), params_);
  return k;
}

Posterior GpModel::posterior(const std::vector<double>& z) const {
  if (z.size() != dim_) throw std::invalid_argument("gp posterior: dimension mismatch");
  const std::size_t n = x_.size();
  std::vector<double> k = kvec(z);
  double mu = mean_;
  for (std::size_t i = 0; i < n; ++i) mu += k[i] * alpha_[i];
  std::vector<double> v = k;
  forward_solve(chol_, n, v);
  double var = params_.signal_var;
  for (double vi : v) var -= vi * vi;
  return {mu, std::sqrt(std::max(0.0, var))};
}

std::vector<Posterior> GpModel::posterior_batch(const std::vector<std::vector<double>>& zs) const {
  const std::size_t n = x_.size();
  const std::size_t m = zs.size();
  // K_xc laid out candidate-major contiguous so the forward solve
  // vectorizes across candidates
  std::vector<double> kx(n * m);
  std::vector<double> mu(m, mean_);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < m; ++c) {
      const double k = matern52(distance(zs[c], x_[i]), params_);
      kx[i * m + c] = k;
      mu[c] += k * alpha_[i];
    }
  // rows of V = L^-1 K_xc, accumulating squared norms per candidate
  std::vector<double> var(m, params_.signal_var);
  for (std::size_t i = 0; i < n; ++i) {
    double* vrow = kx.data() + i * m;
    const double* lrow = chol_.data() + i * n;
    for (std::size_t kk = 0; kk < i; ++kk) {
      const double l = lrow[kk];
      if (l == 0.0) continue;
      const double* vk = kx.data() + kk * m;
      for (std::size_t c = 0; c < m; ++c) vrow[c] -= l * vk[c];
    }
    const double inv = 1.0 / lrow[i];
    for (std::size_t c = 0; c < m; ++c) {
      vrow[c] *= inv;
      var[c] -= vrow[c] * vrow[c];
    }
  }
  std::vector<Posterior> out(m);
  for (std::size_t c = 0; c < m; ++c) out[c] = {mu[c], std::sqrt(std::max(0.0, var[c]))};
  return out;
}

double GpModel::log_marginal_likelihood() const {
  const std::size_t n = x_.size();
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += (y_[i] - mean_) * alpha_[i];
  double logdet = 0.0;
  for (std::size_t i = 0; i < n; ++i) logdet += std::log(chol_[i * n + i]);
  return -0.5 * quad - logdet - 0.5 * static_cast<double>(n) * kLog2Pi;
}

double GpModel::factor_residual() const {
  const std::size_t n = x_.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += chol_[i * n + k] * chol_[j * n + k];
      double kij = (i == j) ? params_.signal_var + params_.noise_var + jitter_
                            : matern52(distance(x_[i], x_[j]), params_);
      worst = std::max(worst, std::abs(s - kij));
    }
  return worst;
}

double median_pairwise_distance(const std::vector<std::vector<double>>& xs) {
  std::vector<double> ds;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) ds.push_back(distance(xs[i], xs[j]));
  if (ds.empty()) return 1.0;
  std::sort(ds.begin(), ds.end());
  const double med = ds[ds.size() / 2];
  return med > 0.0 ? med : 1.0;
}

HyperFitResult fit_hyperparams(const std::vector<ExperimentRecord>& records, double noise_var) {
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (const auto& r : records)
    if (r.ok) {
      xs.push_back(r.z);
      ys.push_back(r.y);
    }
  const std::size_t n = xs.size();
  HyperFitResult out;
  out.params.noise_var = noise_var;
  const double med = median_pairwise_distance(xs);
  double ymean = 0.0;
  for (double y : ys) ymean += y;
  ymean /= std::max<std::size_t>(1, n);
  double yvar = 0.0;
  for (double y : ys) yvar += (y - ymean) * (y - ymean);
  yvar /= std::max<std::size_t>(1, n);

  if (n < 3 || yvar < 1e-14) {
    out.params.lengthscale = med;
    out.params.signal_var = std::max(yvar, 1e-12);
    out.fallback = true;
    return out;
  }

  // profile likelihood: for fixed lengthscale the optimal signal variance
  // under zero noise is quad/n with a unit-signal kernel
  auto profiled = [&](double ell, double& sig_out) -> double {
    std::vector<double> a(n * n);
    KernelParams unit{1.0, ell, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      a[i * n + i] = 1.0 + noise_var;
      for (std::size_t j = 0; j < i; ++j) {
        const double k = matern52(distance(xs[i], xs[j]), unit);
        a[i * n + j] = k;
        a[j * n + i] = k;
      }
    }
    bool ok = false;
    for (double jit : {1e-10, 1e-8, 1e-6}) {
      std::vector<double> b = a;
      for (std::size_t i = 0; i < n; ++i) b[i * n + i] += jit;
      if (cholesky_inplace(b, n)) {
        a = std::move(b);
        ok = true;
        break;
      }
    }
    if (!ok) return -1e300;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = ys[i] - ymean;
    forward_solve(a, n, r);
    double quad = 0.0;
    for (double ri : r) quad += ri * ri;
    if (quad <= 0.0 || !std::isfinite(quad)) return -1e300;
    const double sig = quad / static_cast<double>(n);
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) logdet += std::log(a[i * n + i]);
    sig_out = sig;
    return -0.5 * static_cast<double>(n) * (std::log(sig) + 1.0 + kLog2Pi) - logdet;
  };

  // multi-start: coarse geometric grid around the median distance, then a
  // short golden-section refinement in log space
  double best_ll = -1e300, best_ell = med, best_sig = std::max(yvar, 1e-12);
  for (int g = -4; g <= 4; ++g) {
    const double ell = med * std::pow(2.0, g * 0.75);
    if (ell <= 0.0) continue;
    double sig = 0.0;
    const double ll = profiled(ell, sig);
    if (ll > best_ll) {
      best_ll = ll;
      best_ell = ell;
      best_sig = sig;
    }
  }
  if (best_ll <= -1e299) {
    out.params.lengthscale = med;
    out.params.signal_var = std::max(yvar, 1e-12);
    out.fallback = true;
    return out;
  }
  double lo = std::log(best_ell) - 0.55, hi = std::log(best_ell) + 0.55;
  const double phi = 0.6180339887498949;
  double a = hi - (hi - lo) * phi, b = lo + (hi - lo) * phi;
  double siga = 0.0, sigb = 0.0;
  double fa = profiled(std::exp(a), siga), fb = profiled(std::exp(b), sigb);
  for (int it = 0; it < 14; ++it) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      siga = sigb;
      b = lo + (hi - lo) * phi;
      fb = profiled(std::exp(b), sigb);
    } else {
      hi = b;
      b = a;
      fb = fa;
      sigb = siga;
      a = hi - (hi - lo) * phi;
      fa = profiled(std::exp(a), siga);
    }
  }
  if (fa > best_ll) {
    best_ll = fa;
    best_ell = std::exp(a);
    best_sig = siga;
  }
  if (fb > best_ll) {
    best_ll = fb;
    best_ell = std::exp(b);
    best_sig = sigb;
  }
  out.params.lengthscale = best_ell;
  out.params.signal_var = std::max(best_sig, 1e-12);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double normal_pdf(double x) { return 0.3989422804014326779 * std::exp(-0.5 * x * x); }

double acquire_ucb(const GpModel& gp, const std::vector<double>& z, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("acquire_ucb: lambda must be >= 0");
  const Posterior p = gp.posterior(z);
  return p.mean + lambda * p.sd;
}

double acquire_ei_from(const Posterior& p, double y_best) {
  const double delta = p.mean - y_best;
  if (p.sd <= 1e-15) return std::max(0.0, delta);
  const double u = delta / p.sd;
  // clamp: the closed form is non-negative, rounding can drift below zero
  return std::max(0.0, delta * normal_cdf(u) + p.sd * normal_pdf(u));
}

double acquire_ei(const GpModel& gp, const std::vector<double>& z, double y_best) {
  return acquire_ei_from(gp.posterior(z), y_best);
}

}  // namespace sdlab::opt
