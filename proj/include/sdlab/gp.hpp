#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdlab::opt {

struct ExperimentRecord {
  std::vector<double> z;
  double y = 0.0;
  bool ok = true;  // false when the objective returned a non-finite value
};

struct KernelParams {
  double signal_var = 1.0;
  double lengthscale = 1.0;
  double noise_var = 0.0;  // experiments treated as noiseless by default
};

// Matern 5/2 covariance as a function of euclidean distance r >= 0.
double matern52(double r, const KernelParams& p);

struct Posterior {
  double mean = 0.0;
  double sd = 0.0;
};

// Exact GP regression with a Matern 5/2 kernel and constant prior mean.
// The training covariance is Cholesky-factored once; posterior queries are
// pure. New points can be appended via a border update of the factor.
class GpModel {
 public:
  static GpModel fit(const std::vector<ExperimentRecord>& records, const KernelParams& params,
                     double prior_mean);
  static GpModel fit(const std::vector<ExperimentRecord>& records, const KernelParams& params);

  void add_point(const std::vector<double>& z, double y);

  Posterior posterior(const std::vector<double>& z) const;
  // batched query; cheaper than calling posterior() per point
  std::vector<Posterior> posterior_batch(const std::vector<std::vector<double>>& zs) const;

  double log_marginal_likelihood() const;

  std::size_t size() const { return y_.size(); }
  std::size_t dim() const { return dim_; }
  const KernelParams& kernel() const { return params_; }
  double prior_mean() const { return mean_; }
  double jitter() const { return jitter_; }
  const std::vector<std::vector<double>>& inputs() const { return x_; }
  const std::vector<double>& targets() const { return y_; }

  // max |K - L L^T| over the training covariance, for diagnostics
  double factor_residual() const;

 private:
  GpModel() = default;
  void rebuild();
  std::vector<double> kvec(const std::vector<double>& z) const;

  std::size_t dim_ = 0;
  std::vector<std::vector<double>> x_;
  std::vector<double> y_;
  KernelParams params_;
  double mean_ = 0.0;
  double jitter_ = 0.0;
  std::vector<double> chol_;   // row-major lower triangle, n x n
  std::vector<double> alpha_;  // (K + noise + jitter)^-1 (y - mean)
};

// Log-marginal-likelihood hyperparameter fit: grid plus local refinement
// over the lengthscale with the signal variance profiled out analytically.
// Degenerate data (constant y, single point) falls back to the median
// pairwise distance heuristic.
struct HyperFitResult {
  KernelParams params;
  bool fallback = false;
};
HyperFitResult fit_hyperparams(const std::vector<ExperimentRecord>& records, double noise_var = 0.0);

double median_pairwise_distance(const std::vector<std::vector<double>>& xs);

// Acquisition functions (maximization convention).
double acquire_ucb(const GpModel& gp, const std::vector<double>& z, double lambda);
double acquire_ei(const GpModel& gp, const std::vector<double>& z, double y_best);
double acquire_ei_from(const Posterior& p, double y_best);

struct AcquisitionSpec {
  enum class Kind { Ucb, Ei };
  Kind kind = Kind::Ei;
  double lambda = 0.5;  // UCB only
  static AcquisitionSpec ucb(double lambda = 0.5) { return {Kind::Ucb, lambda}; }
  static AcquisitionSpec ei() { return {Kind::Ei, 0.5}; }
};

double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace sdlab::opt
