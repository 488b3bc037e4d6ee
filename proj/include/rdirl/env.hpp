#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "rdirl/mppi.hpp"
#include "rdirl/rng.hpp"

namespace rdirl {

// Analytic benchmark task: deterministic dynamics, a hidden true reward, and
// the feature map feeding the learned cost network.
struct EnvModel {
  std::string name;
  int state_dim = 0;
  int control_dim = 0;
  double dt = 0.0;
  int nsteps = 0;  // episode length cap
  Eigen::VectorXd control_lo, control_hi;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> step;
  std::function<double(const Eigen::VectorXd&)> true_reward;
  std::function<Eigen::VectorXd(Rng&)> reset;
  std::function<bool(const Eigen::VectorXd&)> is_terminal;
  // Cost-net input map (identity for the classic-control tasks; scaled and
  // clipped physical units for the radar task).
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> features;
  bool identity_features = false;  // lets features_batch skip the per-column map
  int feature_dim = 0;
  std::vector<int> net_dims;  // preset cost-net architecture; front() == feature_dim

  Eigen::MatrixXd features_batch(const Eigen::MatrixXd& states) const;
  Eigen::VectorXd true_reward_batch(const Eigen::MatrixXd& states) const;
};

// Pole balancing with a continuous horizontal force, Euler integrated.
// Reward +1 per step while |x| <= 2.4 and |angle| <= 12 degrees.
Eigen::VectorXd cartpole_step(const Eigen::VectorXd& state, double force);

// Classic hill-climb car with a continuous throttle; reward -1 per step until
// the goal x >= 0.5.
Eigen::VectorXd mountaincar_step(const Eigen::VectorXd& state, double force);

// Cognitive-radar pursuit: planar second-order unicycle radar, 3-D
// constant-velocity target.
struct RadarState {
  double x = 0, y = 0, z = 0;
  double heading = 0;    // wrapped to (-pi, pi]
  double speed = 0;      // >= 0
  double turn_rate = 0;
  Eigen::Vector3d target_pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d target_vel = Eigen::Vector3d::Zero();

  Eigen::VectorXd to_vector() const;
  static RadarState from_vector(const Eigen::VectorXd& v);
};

RadarState radar_step(const RadarState& state, double accel, double turn_accel);

// log det of the 3x3 position Fisher information of a range/azimuth/elevation
// sensor with range-dependent noise; larger when the target is closer.
double fim_reward(const Eigen::VectorXd& radar_env_state);

EnvModel make_cartpole();
EnvModel make_mountaincar();
EnvModel make_radar();
EnvModel make_env(const std::string& name);          // throws on unknown name
MppiConfig env_mppi_preset(const std::string& name);  // throws on unknown name
const std::vector<std::string>& env_names();

}  // namespace rdirl
