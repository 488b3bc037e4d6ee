#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rdirl/env.hpp"
#include "rdirl/expert.hpp"
#include "rdirl/harness.hpp"
#include "rdirl/trajectory.hpp"
#include "rdirl/verify.hpp"

namespace {

void add_mppi_overrides(CLI::App* cmd, rdirl::RunConfig& cfg) {
  cmd->add_option("--mppi-horizon", cfg.mppi_horizon, "Planner horizon override");
  cmd->add_option("--mppi-rollouts", cfg.mppi_rollouts, "Planner rollout-count override");
  cmd->add_option("--mppi-iters", cfg.mppi_update_iterations,
                  "Planner update iterations override");
  cmd->add_option("--mppi-temperature", cfg.mppi_temperature, "Planner temperature override");
  cmd->add_option("--mppi-sigma", cfg.mppi_sigma,
                  "Exploration noise scale override (applied to every control dim)");
  cmd->add_option("--mppi-beta", cfg.mppi_beta,
                  "Exploration noise AR(1) correlation override (>= 0 to apply)");
  cmd->add_option("--mppi-penalty", cfg.penalty_mode,
                  "Control penalty: 'cross' or 'quadratic' (default: env preset)");
}

int cmd_expert_gen(const std::string& env_name, int n_steps, std::uint64_t seed,
                   const std::string& out, bool strip, int retries) {
  const rdirl::EnvModel env = rdirl::make_env(env_name);
  const rdirl::MppiConfig mppi = rdirl::env_mppi_preset(env_name);
  const int steps = n_steps > 0 ? n_steps : env.nsteps;
  rdirl::Trajectory best;
  std::uint64_t used_seed = seed;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
    rdirl::Trajectory t = rdirl::generate_expert(env, mppi, steps, s);
    if (best.records.empty() || t.total_reward() > best.total_reward()) {
      best = t;
      used_seed = s;
    }
    if (!best.truncated || env_name == "mountaincar") break;  // truncation = goal there
  }
  if (strip) best = best.strip_controls();
  rdirl::save_trajectory(best, out);
  std::cout << "wrote " << out << ": env=" << best.env_name << " seed=" << used_seed
            << " records=" << best.records.size() << " total_reward=" << best.total_reward()
            << (best.truncated ? " (ended at a terminal state)" : "") << "\n";
  return 0;
}

int cmd_eval(const std::string& theta_path, const std::string& env_name, std::uint64_t seed,
             int n_steps, const std::string& demo_path) {
  const rdirl::EnvModel env = rdirl::make_env(env_name);
  const rdirl::MppiConfig mppi = rdirl::env_mppi_preset(env_name);
  const Eigen::VectorXd theta = rdirl::load_theta(theta_path);
  const rdirl::CostNet net(env.net_dims, theta);
  const int steps = n_steps > 0 ? n_steps : env.nsteps;
  const double raw = rdirl::eval_policy(env, mppi, net, seed, steps);
  std::cout << "reward_raw=" << raw;
  if (!demo_path.empty()) {
    const rdirl::Trajectory demo = rdirl::load_trajectory(demo_path);
    rdirl::validate_trajectory(demo, env);
    const double floor = rdirl::zero_control_reward(env, seed, steps);
    std::cout << " reward_norm=" << rdirl::normalize_reward(raw, demo.total_reward(), floor)
              << " (expert=" << demo.total_reward() << ", floor=" << floor << ")";
  }
  std::cout << "\n";
  return 0;
}

void print_train_summary(const rdirl::RunConfig& cfg,
                         const std::vector<rdirl::SeedCurve>& curves) {
  const std::vector<double> mean = rdirl::mean_norm_by_episode(curves);
  std::cout << "learner=" << cfg.learner << " env=" << cfg.env_name
            << " seeds=" << curves.size() << "\n";
  for (std::size_t e = 0; e < mean.size(); ++e)
    std::cout << "episode " << e << ": mean normalized reward " << mean[e] << "\n";
  // Final-episode mean +- sample standard deviation across seeds.
  double var = 0.0;
  const double final_mean = mean.back();
  for (const rdirl::SeedCurve& c : curves) {
    const double dev = c.rows.back().reward_norm - final_mean;
    var += dev * dev;
  }
  if (curves.size() > 1) var /= static_cast<double>(curves.size() - 1);
  char line[96];
  std::snprintf(line, sizeof(line), "final: %.3f+-%.3f normalized reward\n", final_mean,
                std::sqrt(var));
  std::cout << line;
  if (!cfg.out_dir.empty()) std::cout << "outputs in " << cfg.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online inverse reinforcement learning with a recursive second-order learner"};
  app.require_subcommand(1);

  // ------------------------------------------------------------ expert gen
  auto* expert = app.add_subcommand("expert", "Expert demonstration tools");
  expert->require_subcommand(1);
  auto* gen = expert->add_subcommand("gen", "Generate an expert demonstration");
  std::string gen_env = "cartpole", gen_out = "demo.rdtr";
  int gen_steps = 0, gen_retries = 0;
  std::uint64_t gen_seed = 0;
  bool gen_keep_controls = false;
  gen->add_option("--env", gen_env, "Environment name")->check(CLI::IsMember(rdirl::env_names()));
  gen->add_option("--steps", gen_steps, "Episode length (0: env default)");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output trajectory file")->required();
  gen->add_option("--retries", gen_retries,
                  "Extra seeds to try when the episode ends early (best kept)");
  gen->add_flag("--keep-controls", gen_keep_controls,
                "Keep controls in the file (default strips them for demo use)");

  // ------------------------------------------------------------ train
  auto* train = app.add_subcommand("train", "Run online training from a demonstration");
  rdirl::RunConfig cfg;
  train->add_option("--env", cfg.env_name, "Environment name")
      ->check(CLI::IsMember(rdirl::env_names()));
  train->add_option("--learner", cfg.learner, "Learner: rdirl or sgd")
      ->check(CLI::IsMember(std::vector<std::string>{"rdirl", "sgd"}));
  train->add_option("--demo", cfg.demo_path, "Demonstration trajectory file")->required();
  train->add_option("--episodes", cfg.episodes, "Training episodes");
  train->add_option("--steps", cfg.n_steps, "Env steps per episode (0: env default)");
  train->add_option("--seeds", cfg.seeds, "Seeds to run (space separated)");
  train->add_option("--out", cfg.out_dir, "Output directory (CSV, checkpoints, metadata)");
  train->add_option("--p0", cfg.p0_scale, "Initial covariance scale");
  train->add_option("--q", cfg.q_scale, "Process-noise scale");
  train->add_option("--lambda-gn", cfg.lambda_gn, "Curvature ridge");
  train->add_option("--lr", cfg.learning_rate, "Baseline learning rate");
  train->add_option("--lam-min", cfg.lam_min, "Curvature projection floor");
  train->add_flag("--raw-innovation", cfg.raw_innovation,
                  "Skip the curvature projection (diagnostic)");
  train->add_flag("--mppi-reset-per-step", cfg.mppi_reset_per_step,
                  "Re-zero the planner nominal every step instead of shifting");
  train->add_flag("--stop-on-terminal", cfg.stop_on_terminal,
                  "End each seed's run after its first episode reaching a terminal state");
  train->add_option("--checkpoint-every", cfg.checkpoint_every,
                    "Save parameters every N episodes (0: final only)");
  add_mppi_overrides(train, cfg);

  // ------------------------------------------------------------ eval
  auto* eval = app.add_subcommand("eval", "Roll out a saved cost under the planner");
  std::string eval_theta, eval_env = "cartpole", eval_demo;
  std::uint64_t eval_seed = 0;
  int eval_steps = 0;
  eval->add_option("--theta", eval_theta, "Saved parameter file")->required();
  eval->add_option("--env", eval_env, "Environment name")
      ->check(CLI::IsMember(rdirl::env_names()));
  eval->add_option("--seed", eval_seed, "Rollout seed");
  eval->add_option("--steps", eval_steps, "Episode length (0: env default)");
  eval->add_option("--demo", eval_demo, "Demo file for normalized reward (optional)");

  // ------------------------------------------------------------ verify
  auto* verify = app.add_subcommand("verify", "Run runtime self-checks");
  std::string suite = "all";
  verify->add_option("--suite", suite, "Suite to run")
      ->check(CLI::IsMember(rdirl::verify_suite_names()));

  // ------------------------------------------------------------ sweep
  auto* sweep = app.add_subcommand("sweep", "Run a list of training configs from JSON");
  std::string sweep_path;
  sweep->add_option("config", sweep_path, "JSON file: either one config object or "
                                          "{\"runs\": [config, ...]}")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_expert_gen(gen_env, gen_steps, gen_seed, gen_out, !gen_keep_controls,
                            gen_retries);
    if (train->parsed()) {
      const std::vector<rdirl::SeedCurve> curves = rdirl::run_training(cfg);
      print_train_summary(cfg, curves);
      return 0;
    }
    if (eval->parsed())
      return cmd_eval(eval_theta, eval_env, eval_seed, eval_steps, eval_demo);
    if (verify->parsed()) return rdirl::run_verify_suite(suite, std::cout) == 0 ? 0 : 1;
    if (sweep->parsed()) {
      std::ifstream in(sweep_path);
      if (!in) throw std::runtime_error("cannot open sweep config: " + sweep_path);
      const nlohmann::json sweep_doc = nlohmann::json::parse(in);
      std::vector<std::string> files;
      if (sweep_doc.contains("runs")) {
        // Expand to one temp file per run so run_config_from_json_file stays
        // the single parsing path.
        int idx = 0;
        for (const auto& run : sweep_doc["runs"]) {
          const std::string tmp = sweep_path + ".run" + std::to_string(idx++) + ".json";
          std::ofstream out(tmp, std::ios::trunc);
          out << run.dump(2);
          out.close();
          files.push_back(tmp);
        }
      } else {
        files.push_back(sweep_path);
      }
      for (const std::string& f : files) {
        const rdirl::RunConfig rc = rdirl::run_config_from_json_file(f);
        std::cout << "=== run: " << rdirl::run_config_to_json(rc) << "\n";
        print_train_summary(rc, rdirl::run_training(rc));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
