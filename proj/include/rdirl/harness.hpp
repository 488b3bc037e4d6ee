#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdirl/cost_net.hpp"
#include "rdirl/env.hpp"
#include "rdirl/expert.hpp"
#include "rdirl/mppi.hpp"
#include "rdirl/trajectory.hpp"

namespace rdirl {

inline constexpr const char* kVersion = "0.1.0";

// One experiment: a learner, an env preset, a demo trajectory, seeds.
struct RunConfig {
  std::string env_name = "cartpole";
  std::string learner = "rdirl";  // "rdirl" or "sgd"
  int episodes = 5;
  int n_steps = 0;  // 0: use the env preset's episode length
  std::string demo_path;
  double p0_scale = 1e-2;
  double q_scale = 1e-4;
  double lambda_gn = 1e-6;
  double learning_rate = 1e-4;   // first-order baseline only
  double lam_min = 1e-8;         // PSD projection floor
  bool raw_innovation = false;   // skip the PSD projection
  bool mppi_reset_per_step = false;
  bool stop_on_terminal = false;  // end a seed's run after its first episode
                                  // that reaches a terminal state (goal tasks)
  int checkpoint_every = 0;      // episodes between checkpoints; 0 = final only off
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir;

  // MPPI overrides; non-positive / negative-beta / empty values fall back to
  // the env preset.
  int mppi_horizon = 0;
  int mppi_rollouts = 0;
  int mppi_update_iterations = 0;
  double mppi_temperature = 0.0;
  double mppi_sigma = 0.0;
  double mppi_beta = -1.0;
  std::string penalty_mode;  // "", "cross", "quadratic"

  void validate() const;
};

MppiConfig resolve_mppi_config(const RunConfig& cfg);

struct EpisodeRow {
  int episode = 0;
  std::uint64_t seed = 0;
  double reward_raw = 0.0;
  double reward_norm = 0.0;
  double wall_s = 0.0;
  bool terminal_hit = false;  // some terminal state was reached this episode
};

struct SeedCurve {
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> rows;
  Eigen::VectorXd final_theta;
};

// (r_learner - r_floor) / (r_expert - r_floor); throws when expert and floor
// coincide (degenerate normalization).
double normalize_reward(double r_learner, double r_expert, double r_floor);

inline constexpr const char* kCurveCsvHeader = "episode,seed,reward_raw,reward_norm,wall_s";

// Runs the online training loop for one seed. Per episode: covariance,
// planner nominal, and env are re-initialized; cost-net parameters persist.
// Per step: read the next demo record, plan from the learner's own state under
// the current cost, draw one weighted policy sample, update the learner,
// execute the planned control, shift the planner. The env auto-resets at
// terminal states so every demo record produces an update; the logged episode
// reward counts only until the first terminal. When `csv` is non-null, one
// CSV row is written and flushed per episode (crash leaves a valid prefix).
SeedCurve run_training_seed(const RunConfig& cfg, const EnvModel& env,
                            const Trajectory& demo, std::uint64_t seed, std::ostream* csv);

// Multi-seed driver: loads env + demo from cfg, writes per-seed CSVs,
// checkpoints, and metadata.json under cfg.out_dir (if set).
std::vector<SeedCurve> run_training(const RunConfig& cfg);

// Rolls out the planner under a fixed learned cost for n_steps (no learning);
// returns cumulative true reward until the first terminal.
double eval_policy(const EnvModel& env, const MppiConfig& mppi_cfg, const CostNet& net,
                   std::uint64_t seed, int n_steps);

// Mean over seeds of the per-episode normalized reward; curves must agree on
// episode count.
std::vector<double> mean_norm_by_episode(const std::vector<SeedCurve>& curves);

RunConfig run_config_from_json_file(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);
void write_metadata(const RunConfig& cfg, const EnvModel& env, const MppiConfig& mppi,
                    const Trajectory& demo, const std::string& path);

}  // namespace rdirl
