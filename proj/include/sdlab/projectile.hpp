#pragma once

#include <cstdint>
#include <vector>

namespace sdlab::ex {

inline constexpr double kGravity = 9.8;
inline constexpr int kTrajectorySamples = 64;
inline constexpr double kTrajectoryDuration = 2.0;  // seconds

// Height samples of y(t) = u sin(theta) t - g t^2 / 2 + beta t^3 + gamma t^5
// on a uniform time grid.
struct Trajectory {
  std::vector<double> y;
  double u = 0.0;
  double theta_deg = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

double trajectory_dt();
Trajectory gen_trajectory(double u, double theta_deg, double beta, double gamma);

// RMS deviation of the sampled second derivative from -g (physical units).
double accel_objective(const std::vector<double>& y);

// constant-acceleration estimate: the mean second difference (telescoping,
// so endpoint-limited and robust to samplewise noise)
double mean_acceleration(const std::vector<double>& y);

double max_height(const std::vector<double>& y);

// first-step finite-difference velocity magnitude, the launch-speed proxy
double launch_speed(const std::vector<double>& y);

// Training corpus: realistic and polynomial pseudo-trajectories, with
// per-sample min/max normalization into [0,1] so a ReLU decoder can emit
// them.
struct ProjectileDataset {
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<double>> normalized;  // one row per trajectory
  std::vector<double> sample_min;               // per time sample
  std::vector<double> sample_max;
};

ProjectileDataset make_projectile_dataset();

std::vector<double> normalize_trajectory(const ProjectileDataset& ds, const std::vector<double>& y);
std::vector<double> denormalize_trajectory(const ProjectileDataset& ds,
                                           const std::vector<double>& x);

}  // namespace sdlab::ex
