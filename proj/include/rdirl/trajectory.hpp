#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace rdirl {

struct TrajRecord {
  std::uint64_t t = 0;   // step index, strictly increasing within a trajectory
  Eigen::VectorXd x;     // state
  Eigen::VectorXd u;     // control; empty when the file carries no controls
  double r_true = 0.0;   // true reward of x
};

struct Trajectory {
  std::string env_name;
  int state_dim = 0;
  int control_dim = 0;
  bool has_controls = false;
  bool truncated = false;  // episode ended at a terminal state before n_steps
  std::uint64_t seed = 0;
  std::vector<TrajRecord> records;

  double total_reward() const;
  // Demo form: same states and rewards, controls dropped (the file format
  // then stores no control payload at all).
  Trajectory strip_controls() const;
};

// Binary trajectory file (documented byte-exactly in docs/formats.md).
// Errors: unreadable file, corrupt header, version mismatch, payload length
// not matching the header-declared record count.
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

// Throws when the trajectory's env name or dimensions do not match the model.
struct EnvModel;
void validate_trajectory(const Trajectory& traj, const EnvModel& env);

// Flat little-endian parameter blob with a 16-byte header.
void save_theta(const Eigen::VectorXd& theta, const std::string& path);
Eigen::VectorXd load_theta(const std::string& path);

// Training checkpoint: parameters plus the dense covariance state.
struct Checkpoint {
  Eigen::VectorXd theta;
  Eigen::MatrixXd p;
  double q_scale = 0.0;
  std::uint64_t step_index = 0;
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rdirl
