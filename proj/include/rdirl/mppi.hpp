#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "rdirl/rng.hpp"

namespace rdirl {

enum class PenaltyMode {
  kCrossTerm,  // temperature * u_nom^T Sigma^-1 eps per step (default)
  kQuadratic,  // temperature/2 * u^T Sigma^-1 u per step on the full control
};

struct MppiConfig {
  int horizon = 0;
  int num_rollouts = 0;
  double temperature = 0.0;
  Eigen::VectorXd control_sigma;  // per control dimension
  Eigen::VectorXd control_lo;
  Eigen::VectorXd control_hi;
  double noise_beta = 0.0;  // AR(1) correlation of exploration noise over time
  int update_iterations = 1;
  PenaltyMode penalty = PenaltyMode::kCrossTerm;

  int control_dim() const { return static_cast<int>(control_sigma.size()); }
  void validate() const;  // throws std::invalid_argument on any violation
};

struct MppiPlan {
  Eigen::VectorXd control;         // executed control: updated nominal, step 0
  Eigen::MatrixXd first_states;    // state_dim x K: each rollout's state after one step
  Eigen::MatrixXd first_controls;  // control_dim x K: each rollout's first control
  Eigen::VectorXd weights;         // K, sums to 1
};

// Sampling-based receding-horizon planner. Rollouts are deterministic given
// the controller's RNG state; all exploration noise is drawn up front each
// iteration in a fixed order (time-major, then rollout, then control dim).
class MppiController {
 public:
  MppiController(MppiConfig cfg, int state_dim, std::uint64_t seed);

  // cost_batch maps a state_dim x K matrix of states to K per-state costs;
  // step advances a single state by a control. Updates the nominal control
  // sequence by exponentially weighted averaging of perturbations (repeated
  // update_iterations times) and returns the executed control plus the final
  // iteration's first-step rollout population for policy sampling.
  MppiPlan plan(const Eigen::VectorXd& x0,
                const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& cost_batch,
                const std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                                    const Eigen::VectorXd&)>& step);

  // Receding-horizon shift: drop the executed first control, repeat the last.
  void shift();

  void reset_nominal() { nominal_.setZero(); }
  void set_nominal(const Eigen::MatrixXd& nominal);  // must be control_dim x horizon

  const MppiConfig& config() const { return cfg_; }
  const Eigen::MatrixXd& nominal() const { return nominal_; }  // control_dim x H

 private:
  MppiConfig cfg_;
  int state_dim_ = 0;
  Eigen::MatrixXd nominal_;
  Rng rng_;
};

// Weight-proportional draw of a rollout index from a plan.
int sample_policy_step(const MppiPlan& plan, Rng& rng);

// Thread-count override for rollout dynamics (RDIRL_THREADS, default 1).
int rollout_thread_count();

}  // namespace rdirl
