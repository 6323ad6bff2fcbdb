#include "sdlab/projectile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdlab::ex {

namespace {
constexpr double kDegToRad = 0.017453292519943295;
}

double trajectory_dt() { return kTrajectoryDuration / (kTrajectorySamples - 1); }

Trajectory gen_trajectory(double u, double theta_deg, double beta, double gamma) {
  Trajectory tr;
  tr.u = u;
  tr.theta_deg = theta_deg;
  tr.beta = beta;
  tr.gamma = gamma;
  tr.y.resize(kTrajectorySamples);
  const double vy = u * std::sin(theta_deg * kDegToRad);
  const double dt = trajectory_dt();
  for (int i = 0; i < kTrajectorySamples; ++i) {
    const double t = i * dt;
    const double t2 = t * t;
    tr.y[i] = vy * t - 0.5 * kGravity * t2 + beta * t2 * t + gamma * t2 * t2 * t;
  }
  return tr;
}

double accel_objective(const std::vector<double>& y) {
  if (y.size() < 3) throw std::invalid_argument("accel_objective: need at least 3 samples");
  const double dt = trajectory_dt();
  double ss = 0.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double a = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (dt * dt);
    const double dev = a + kGravity;
    ss += dev * dev;
  }
  return std::sqrt(ss / static_cast<double>(y.size() - 2));
}

double mean_acceleration(const std::vector<double>& y) {
  if (y.size() < 3) throw std::invalid_argument("mean_acceleration: need at least 3 samples");
  const double dt = trajectory_dt();
  const std::size_t n = y.size();
  // sum of interior second differences telescopes to a difference of
  // boundary slopes
  const double first = y[1] - y[0];
  const double last = y[n - 1] - y[n - 2];
  return (last - first) / (static_cast<double>(n - 2) * dt * dt);
}

double max_height(const std::vector<double>& y) {
  if (y.empty()) throw std::invalid_argument("max_height: empty trajectory");
  return *std::max_element(y.begin(), y.end());
}

double launch_speed(const std::vector<double>& y) {
  if (y.size() < 2) throw std::invalid_argument("launch_speed: need at least 2 samples");
  return std::abs(y[1] - y[0]) / trajectory_dt();
}

ProjectileDataset make_projectile_dataset() {
  ProjectileDataset ds;
  // 9 speeds x 30 angles x 10 (beta, gamma) shapes = 2700 trajectories;
  // (0, 0) is the realistic family, the rest are pseudo-projectiles
  const int n_u = 9, n_theta = 30;
  const double shape_vals[3] = {2.0, 1.0, -1.0};
  std::vector<std::pair<double, double>> shapes;
  shapes.emplace_back(0.0, 0.0);
  for (double b : shape_vals)
    for (double g : shape_vals) shapes.emplace_back(b, g);
  for (int iu = 0; iu < n_u; ++iu) {
    const double u = 1.0 + 5.0 * iu / (n_u - 1);
    for (int it = 0; it < n_theta; ++it) {
      const double theta = 30.0 + 30.0 * it / (n_theta - 1);
      for (const auto& [b, g] : shapes) ds.trajectories.push_back(gen_trajectory(u, theta, b, g));
    }
  }

  ds.sample_min.assign(kTrajectorySamples, 1e300);
  ds.sample_max.assign(kTrajectorySamples, -1e300);
  for (const auto& tr : ds.trajectories)
    for (int i = 0; i < kTrajectorySamples; ++i) {
      ds.sample_min[i] = std::min(ds.sample_min[i], tr.y[i]);
      ds.sample_max[i] = std::max(ds.sample_max[i], tr.y[i]);
    }
  ds.normalized.reserve(ds.trajectories.size());
  for (const auto& tr : ds.trajectories) ds.normalized.push_back(normalize_trajectory(ds, tr.y));
  return ds;
}

std::vector<double> normalize_trajectory(const ProjectileDataset& ds,
                                         const std::vector<double>& y) {
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double span = ds.sample_max[i] - ds.sample_min[i];
    x[i] = span > 0.0 ? (y[i] - ds.sample_min[i]) / span : 0.0;
  }
  return x;
}

std::vector<double> denormalize_trajectory(const ProjectileDataset& ds,
                                           const std::vector<double>& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double span = ds.sample_max[i] - ds.sample_min[i];
    y[i] = ds.sample_min[i] + (span > 0.0 ? span * x[i] : 0.0);
  }
  return y;
}

}  // namespace sdlab::ex
