#include "rdirl/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "rdirl/baselines.hpp"
#include "rdirl/recursion.hpp"

namespace rdirl {

void RunConfig::validate() const {
  if (learner != "rdirl" && learner != "sgd")
    throw std::invalid_argument("learner must be 'rdirl' or 'sgd', got '" + learner + "'");
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
  if (demo_path.empty()) throw std::invalid_argument("demo_path must be set");
  if (!(p0_scale > 0.0)) throw std::invalid_argument("p0_scale must be > 0");
  if (q_scale < 0.0) throw std::invalid_argument("q_scale must be >= 0");
  if (lambda_gn < 0.0) throw std::invalid_argument("lambda_gn must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (lam_min < 0.0) throw std::invalid_argument("lam_min must be >= 0");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (!penalty_mode.empty() && penalty_mode != "cross" && penalty_mode != "quadratic")
    throw std::invalid_argument("penalty_mode must be '', 'cross', or 'quadratic'");
}

MppiConfig resolve_mppi_config(const RunConfig& cfg) {
  MppiConfig m = env_mppi_preset(cfg.env_name);
  if (cfg.mppi_horizon > 0) m.horizon = cfg.mppi_horizon;
  if (cfg.mppi_rollouts > 0) m.num_rollouts = cfg.mppi_rollouts;
  if (cfg.mppi_update_iterations > 0) m.update_iterations = cfg.mppi_update_iterations;
  if (cfg.mppi_temperature > 0.0) m.temperature = cfg.mppi_temperature;
  if (cfg.mppi_sigma > 0.0) m.control_sigma.setConstant(cfg.mppi_sigma);
  if (cfg.mppi_beta >= 0.0) m.noise_beta = cfg.mppi_beta;
  if (cfg.penalty_mode == "cross") m.penalty = PenaltyMode::kCrossTerm;
  if (cfg.penalty_mode == "quadratic") m.penalty = PenaltyMode::kQuadratic;
  m.validate();
  return m;
}

double normalize_reward(double r_learner, double r_expert, double r_floor) {
  const double span = r_expert - r_floor;
  if (!(std::abs(span) > 1e-12))
    throw std::invalid_argument("normalize_reward: expert and floor rewards coincide");
  return (r_learner - r_floor) / span;
}

namespace {

std::string csv_row(const EpisodeRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%llu,%.17g,%.17g,%.6f\n", row.episode,
                static_cast<unsigned long long>(row.seed), row.reward_raw, row.reward_norm,
                row.wall_s);
  return buf;
}

}  // namespace

SeedCurve run_training_seed(const RunConfig& cfg, const EnvModel& env,
                            const Trajectory& demo, std::uint64_t seed, std::ostream* csv) {
  cfg.validate();
  validate_trajectory(demo, env);
  const MppiConfig mppi_cfg = resolve_mppi_config(cfg);
  const int n_steps = cfg.n_steps > 0 ? cfg.n_steps : env.nsteps;
  const std::size_t demo_len = demo.records.size();

  CostNet net = CostNet::init(env.net_dims, derive_seed(seed, 10));
  const int d = net.dim();
  Rng sample_rng(derive_seed(seed, 11));

  const double r_expert = demo.total_reward();
  const double r_floor = zero_control_reward(env, seed, n_steps);

  const auto cost_batch = [&](const Eigen::MatrixXd& X) {
    return net.forward_batch(env.features_batch(X));
  };

  if (csv) (*csv) << kCurveCsvHeader << "\n" << std::flush;

  SeedCurve curve;
  curve.seed = seed;
  RdirlState rstate;  // reused so the final episode's covariance survives the loop
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng reset_rng(derive_seed(seed, 2000 + static_cast<std::uint64_t>(ep)));
    Eigen::VectorXd x = env.reset(reset_rng);
    MppiController ctrl(mppi_cfg, env.state_dim, derive_seed(seed, 1000 + static_cast<std::uint64_t>(ep)));

    SgdState sstate;
    if (cfg.learner == "rdirl") {
      rstate = rdirl_init(d, cfg.p0_scale, cfg.q_scale);
      rstate.theta_hat = net.theta();
    } else {
      sstate = sgd_init(d, cfg.learning_rate);
      sstate.theta = net.theta();
    }

    double ep_reward = 0.0;
    bool alive = true;
    bool terminal_hit = false;
    for (int i = 0; i < n_steps; ++i) {
      if (alive) ep_reward += env.true_reward(x);
      MppiPlan plan = ctrl.plan(x, cost_batch, env.step);

      if (static_cast<std::size_t>(i) < demo_len) {
        const int k = sample_policy_step(plan, sample_rng);
        CostEval eval_d, eval_s;
        eval_d.cost = net.backward(env.features(demo.records[i].x), eval_d.grad);
        eval_s.cost = net.backward(env.features(plan.first_states.col(k)), eval_s.grad);
        if (cfg.learner == "rdirl") {
          try {
            rdirl_step(rstate, eval_d, eval_s,
                       cfg.raw_innovation ? InnovationMode::kRaw : InnovationMode::kProjected,
                       cfg.lam_min);
          } catch (const std::exception&) {
            std::cerr << "DBG crash ep=" << ep << " i=" << i
                      << " |th|=" << net.theta().cwiseAbs().maxCoeff()
                      << " |gd|=" << eval_d.grad.cwiseAbs().maxCoeff()
                      << " |gs|=" << eval_s.grad.cwiseAbs().maxCoeff()
                      << " |P|=" << rstate.p_theta.cwiseAbs().maxCoeff()
                      << " cd=" << eval_d.cost << " cs=" << eval_s.cost << "\n";
            throw;
          }
          if (rstate.step_index % 50 == 0)
            std::cerr << "DBG ep=" << ep << " i=" << i
                      << " |th|=" << net.theta().cwiseAbs().maxCoeff()
                      << " |gd|=" << eval_d.grad.cwiseAbs().maxCoeff()
                      << " |gs|=" << eval_s.grad.cwiseAbs().maxCoeff()
                      << " |P|=" << rstate.p_theta.cwiseAbs().maxCoeff()
                      << " cd=" << eval_d.cost << " cs=" << eval_s.cost << "\n";
          net.theta() = rstate.theta_hat;
        } else {
          sgd_step(sstate, eval_d, eval_s);
          net.theta() = sstate.theta;
        }
      }

      x = env.step(x, plan.control);
      if (env.is_terminal(x)) {
        if (alive) {
          alive = false;
          terminal_hit = true;
        }
        if (static_cast<std::size_t>(i + 1) >= demo_len) break;  // no reward or updates left
        x = env.reset(reset_rng);
        ctrl.reset_nominal();
      } else if (cfg.mppi_reset_per_step) {
        ctrl.reset_nominal();
      } else {
        ctrl.shift();
      }
    }

    EpisodeRow row;
    row.episode = ep;
    row.seed = seed;
    row.reward_raw = ep_reward;
    row.reward_norm = normalize_reward(ep_reward, r_expert, r_floor);
    row.terminal_hit = terminal_hit;
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    curve.rows.push_back(row);
    if (csv) (*csv) << csv_row(row) << std::flush;

    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
        (ep + 1) % cfg.checkpoint_every == 0 && ep + 1 < cfg.episodes) {
      save_theta(net.theta(), cfg.out_dir + "/theta_" + cfg.learner + "_seed" +
                                  std::to_string(seed) + "_ep" + std::to_string(ep + 1) + ".rdth");
    }
    if (cfg.stop_on_terminal && terminal_hit) break;
  }

  curve.final_theta = net.theta();
  if (!cfg.out_dir.empty()) {
    save_theta(net.theta(), cfg.out_dir + "/theta_" + cfg.learner + "_seed" +
                                std::to_string(seed) + "_final.rdth");
    if (cfg.learner == "rdirl") {
      Checkpoint c;
      c.theta = net.theta();
      c.p = rstate.p_theta;
      c.q_scale = cfg.q_scale;
      c.step_index = static_cast<std::uint64_t>(rstate.step_index);
      save_checkpoint(c, cfg.out_dir + "/ckpt_seed" + std::to_string(seed) + "_final.rdck");
    }
  }
  return curve;
}

std::vector<SeedCurve> run_training(const RunConfig& cfg) {
  cfg.validate();
  const EnvModel env = make_env(cfg.env_name);
  const Trajectory demo = load_trajectory(cfg.demo_path);
  validate_trajectory(demo, env);
  const MppiConfig mppi_cfg = resolve_mppi_config(cfg);

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_metadata(cfg, env, mppi_cfg, demo, cfg.out_dir + "/metadata.json");
  }

  std::vector<SeedCurve> curves;
  for (std::uint64_t seed : cfg.seeds) {
    std::ofstream csv;
    if (!cfg.out_dir.empty()) {
      const std::string path =
          cfg.out_dir + "/curve_" + cfg.learner + "_seed" + std::to_string(seed) + ".csv";
      csv.open(path, std::ios::binary | std::ios::trunc);
      if (!csv) throw std::runtime_error("cannot open curve file: " + path);
    }
    curves.push_back(run_training_seed(cfg, env, demo, seed, csv.is_open() ? &csv : nullptr));
  }
  return curves;
}

double eval_policy(const EnvModel& env, const MppiConfig& mppi_cfg, const CostNet& net,
                   std::uint64_t seed, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("eval_policy: n_steps must be >= 1");
  Rng reset_rng(derive_seed(seed, 0));
  Eigen::VectorXd x = env.reset(reset_rng);
  MppiController ctrl(mppi_cfg, env.state_dim, derive_seed(seed, 1));
  const auto cost_batch = [&](const Eigen::MatrixXd& X) {
    return net.forward_batch(env.features_batch(X));
  };
  double total = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    total += env.true_reward(x);
    MppiPlan plan = ctrl.plan(x, cost_batch, env.step);
    x = env.step(x, plan.control);
    if (env.is_terminal(x)) break;
    ctrl.shift();
  }
  return total;
}

std::vector<double> mean_norm_by_episode(const std::vector<SeedCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("mean_norm_by_episode: no curves");
  const std::size_t n = curves.front().rows.size();
  std::vector<double> mean(n, 0.0);
  for (const SeedCurve& c : curves) {
    if (c.rows.size() != n)
      throw std::invalid_argument("mean_norm_by_episode: episode counts differ");
    for (std::size_t e = 0; e < n; ++e) mean[e] += c.rows[e].reward_norm;
  }
  for (double& v : mean) v /= static_cast<double>(curves.size());
  return mean;
}

namespace {

nlohmann::ordered_json config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["env"] = cfg.env_name;
  j["learner"] = cfg.learner;
  j["episodes"] = cfg.episodes;
  j["n_steps"] = cfg.n_steps;
  j["demo"] = cfg.demo_path;
  j["p0_scale"] = cfg.p0_scale;
  j["q_scale"] = cfg.q_scale;
  j["lambda_gn"] = cfg.lambda_gn;
  j["learning_rate"] = cfg.learning_rate;
  j["lam_min"] = cfg.lam_min;
  j["raw_innovation"] = cfg.raw_innovation;
  j["mppi_reset_per_step"] = cfg.mppi_reset_per_step;
  j["stop_on_terminal"] = cfg.stop_on_terminal;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  nlohmann::ordered_json m;
  m["horizon"] = cfg.mppi_horizon;
  m["rollouts"] = cfg.mppi_rollouts;
  m["update_iterations"] = cfg.mppi_update_iterations;
  m["temperature"] = cfg.mppi_temperature;
  m["sigma"] = cfg.mppi_sigma;
  m["beta"] = cfg.mppi_beta;
  m["penalty"] = cfg.penalty_mode;
  j["mppi_overrides"] = m;
  return j;
}

}  // namespace

RunConfig run_config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  RunConfig cfg;
  cfg.env_name = j.value("env", cfg.env_name);
  cfg.learner = j.value("learner", cfg.learner);
  cfg.episodes = j.value("episodes", cfg.episodes);
  cfg.n_steps = j.value("n_steps", cfg.n_steps);
  cfg.demo_path = j.value("demo", cfg.demo_path);
  cfg.p0_scale = j.value("p0_scale", cfg.p0_scale);
  cfg.q_scale = j.value("q_scale", cfg.q_scale);
  cfg.lambda_gn = j.value("lambda_gn", cfg.lambda_gn);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.lam_min = j.value("lam_min", cfg.lam_min);
  cfg.raw_innovation = j.value("raw_innovation", cfg.raw_innovation);
  cfg.mppi_reset_per_step = j.value("mppi_reset_per_step", cfg.mppi_reset_per_step);
  cfg.stop_on_terminal = j.value("stop_on_terminal", cfg.stop_on_terminal);
  cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (j.contains("mppi_overrides")) {
    const auto& m = j["mppi_overrides"];
    cfg.mppi_horizon = m.value("horizon", cfg.mppi_horizon);
    cfg.mppi_rollouts = m.value("rollouts", cfg.mppi_rollouts);
    cfg.mppi_update_iterations = m.value("update_iterations", cfg.mppi_update_iterations);
    cfg.mppi_temperature = m.value("temperature", cfg.mppi_temperature);
    cfg.mppi_sigma = m.value("sigma", cfg.mppi_sigma);
    cfg.mppi_beta = m.value("beta", cfg.mppi_beta);
    cfg.penalty_mode = m.value("penalty", cfg.penalty_mode);
  }
  cfg.validate();
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2); }

void write_metadata(const RunConfig& cfg, const EnvModel& env, const MppiConfig& mppi,
                    const Trajectory& demo, const std::string& path) {
  nlohmann::ordered_json j;
  j["code_version"] = kVersion;
  j["config"] = config_json(cfg);
  nlohmann::ordered_json je;
  je["name"] = env.name;
  je["state_dim"] = env.state_dim;
  je["control_dim"] = env.control_dim;
  je["dt"] = env.dt;
  je["nsteps_default"] = env.nsteps;
  je["control_lo"] = std::vector<double>(env.control_lo.data(), env.control_lo.data() + env.control_lo.size());
  je["control_hi"] = std::vector<double>(env.control_hi.data(), env.control_hi.data() + env.control_hi.size());
  je["feature_dim"] = env.feature_dim;
  je["net_dims"] = env.net_dims;
  j["env"] = je;
  nlohmann::ordered_json jm;
  jm["horizon"] = mppi.horizon;
  jm["num_rollouts"] = mppi.num_rollouts;
  jm["temperature"] = mppi.temperature;
  jm["control_sigma"] = std::vector<double>(mppi.control_sigma.data(),
                                            mppi.control_sigma.data() + mppi.control_sigma.size());
  jm["noise_beta"] = mppi.noise_beta;
  jm["update_iterations"] = mppi.update_iterations;
  jm["penalty"] = mppi.penalty == PenaltyMode::kCrossTerm ? "cross" : "quadratic";
  j["mppi"] = jm;
  nlohmann::ordered_json jd;
  jd["path"] = cfg.demo_path;
  jd["env"] = demo.env_name;
  jd["records"] = demo.records.size();
  jd["truncated"] = demo.truncated;
  jd["seed"] = demo.seed;
  jd["total_reward"] = demo.total_reward();
  j["demo"] = jd;
  j["d_theta"] = CostNet::param_count(env.net_dims);
  j["csv_header"] = kCurveCsvHeader;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write metadata: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace rdirl
