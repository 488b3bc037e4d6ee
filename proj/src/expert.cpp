#include "rdirl/expert.hpp"

#include <stdexcept>

namespace rdirl {

Trajectory generate_expert(const EnvModel& env, const MppiConfig& mppi_cfg, int n_steps,
                           std::uint64_t seed) {
  if (n_steps < 1) throw std::invalid_argument("generate_expert: n_steps must be >= 1");
  Trajectory traj;
  traj.env_name = env.name;
  traj.state_dim = env.state_dim;
  traj.control_dim = env.control_dim;
  traj.has_controls = true;
  traj.seed = seed;

  Rng reset_rng(derive_seed(seed, 0));
  MppiController ctrl(mppi_cfg, env.state_dim, derive_seed(seed, 1));
  Eigen::VectorXd x = env.reset(reset_rng);
  const auto cost = [&env](const Eigen::MatrixXd& states) {
    return (-env.true_reward_batch(states)).eval();
  };

  for (int t = 0; t < n_steps; ++t) {
    const MppiPlan plan = ctrl.plan(x, cost, env.step);
    TrajRecord rec;
    rec.t = static_cast<std::uint64_t>(t);
    rec.x = x;
    rec.u = plan.control;
    rec.r_true = env.true_reward(x);
    traj.records.push_back(std::move(rec));
    x = env.step(x, plan.control);
    if (env.is_terminal(x)) {
      TrajRecord last;
      last.t = static_cast<std::uint64_t>(t + 1);
      last.x = x;
      last.u = Eigen::VectorXd::Zero(env.control_dim);  // no control applied here
      last.r_true = env.true_reward(x);
      traj.records.push_back(std::move(last));
      traj.truncated = true;
      break;
    }
    ctrl.shift();
  }
  return traj;
}

double zero_control_reward(const EnvModel& env, std::uint64_t seed, int n_steps) {
  Rng reset_rng(derive_seed(seed, 0));
  Eigen::VectorXd x = env.reset(reset_rng);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(env.control_dim);
  double total = 0.0;
  for (int t = 0; t < n_steps; ++t) {
    total += env.true_reward(x);
    x = env.step(x, zero);
    if (env.is_terminal(x)) break;
  }
  return total;
}

}  // namespace rdirl
