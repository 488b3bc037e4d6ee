#include "rdirl/env.hpp"

#include <cmath>
#include <stdexcept>

namespace rdirl {

Eigen::MatrixXd EnvModel::features_batch(const Eigen::MatrixXd& states) const {
  if (identity_features) return states;
  Eigen::MatrixXd out(feature_dim, states.cols());
  for (int k = 0; k < states.cols(); ++k) out.col(k) = features(states.col(k));
  return out;
}

Eigen::VectorXd EnvModel::true_reward_batch(const Eigen::MatrixXd& states) const {
  Eigen::VectorXd out(states.cols());
  for (int k = 0; k < states.cols(); ++k) out[k] = true_reward(states.col(k));
  return out;
}

// ---------------------------------------------------------------- cartpole

namespace {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kPoleHalfLength = 0.5;
constexpr double kCartpoleDt = 0.02;
constexpr double kForceMax = 10.0;
constexpr double kTrackLimit = 2.4;
const double kAngleLimit = 12.0 * M_PI / 180.0;
}  // namespace

Eigen::VectorXd cartpole_step(const Eigen::VectorXd& state, double force) {
  const double f = std::clamp(force, -kForceMax, kForceMax);
  const double x = state[0], xd = state[1], th = state[2], thd = state[3];
  const double ct = std::cos(th), st = std::sin(th);
  const double total_mass = kMassCart + kMassPole;
  const double tmp = (f + kMassPole * kPoleHalfLength * thd * thd * st) / total_mass;
  const double thacc = (kGravity * st - ct * tmp) /
                       (kPoleHalfLength * (4.0 / 3.0 - kMassPole * ct * ct / total_mass));
  const double xacc = tmp - kMassPole * kPoleHalfLength * thacc * ct / total_mass;
  Eigen::VectorXd next(4);
  next << x + kCartpoleDt * xd, xd + kCartpoleDt * xacc, th + kCartpoleDt * thd,
      thd + kCartpoleDt * thacc;
  return next;
}

EnvModel make_cartpole() {
  EnvModel e;
  e.name = "cartpole";
  e.state_dim = 4;
  e.control_dim = 1;
  e.dt = kCartpoleDt;
  e.nsteps = 150;
  e.control_lo = Eigen::VectorXd::Constant(1, -kForceMax);
  e.control_hi = Eigen::VectorXd::Constant(1, kForceMax);
  e.step = [](const Eigen::VectorXd& s, const Eigen::VectorXd& u) {
    return cartpole_step(s, u[0]);
  };
  e.true_reward = [](const Eigen::VectorXd& s) {
    return (std::abs(s[0]) <= kTrackLimit && std::abs(s[2]) <= kAngleLimit) ? 1.0 : 0.0;
  };
  e.reset = [](Rng& rng) {
    Eigen::VectorXd s(4);
    for (int i = 0; i < 4; ++i) s[i] = rng.uniform(-0.05, 0.05);
    return s;
  };
  e.is_terminal = [](const Eigen::VectorXd& s) {
    return std::abs(s[0]) > kTrackLimit || std::abs(s[2]) > kAngleLimit;
  };
  e.features = [](const Eigen::VectorXd& s) { return s; };
  e.identity_features = true;
  e.feature_dim = 4;
  e.net_dims = {4, 16, 16, 1};
  return e;
}

// ------------------------------------------------------------ mountain car

Eigen::VectorXd mountaincar_step(const Eigen::VectorXd& state, double force) {
  const double f = std::clamp(force, -1.0, 1.0);
  double x = state[0], v = state[1];
  v += 0.0015 * f - 0.0025 * std::cos(3.0 * x);
  double xn = x + v;
  if (xn < -1.2) {
    xn = -1.2;
    v = 0.0;
  } else if (xn > 0.6) {
    xn = 0.6;
  }
  Eigen::VectorXd next(2);
  next << xn, v;
  return next;
}

EnvModel make_mountaincar() {
  EnvModel e;
  e.name = "mountaincar";
  e.state_dim = 2;
  e.control_dim = 1;
  e.dt = 1.0;
  e.nsteps = 200;
  e.control_lo = Eigen::VectorXd::Constant(1, -1.0);
  e.control_hi = Eigen::VectorXd::Constant(1, 1.0);
  e.step = [](const Eigen::VectorXd& s, const Eigen::VectorXd& u) {
    return mountaincar_step(s, u[0]);
  };
  e.true_reward = [](const Eigen::VectorXd& s) { return s[0] >= 0.5 ? 0.0 : -1.0; };
  e.reset = [](Rng& rng) {
    Eigen::VectorXd s(2);
    s << rng.uniform(-0.6, -0.4), 0.0;
    return s;
  };
  e.is_terminal = [](const Eigen::VectorXd& s) { return s[0] >= 0.5; };
  e.features = [](const Eigen::VectorXd& s) { return s; };
  e.identity_features = true;
  e.feature_dim = 2;
  e.net_dims = {2, 16, 16, 1};
  return e;
}

// ------------------------------------------------------------------- radar

namespace {
constexpr double kRadarDt = 0.1;
constexpr double kSpeedMax = 40.0;
constexpr double kTurnRateMax = 2.0;
constexpr double kAccelMax = 2.0;
constexpr double kTurnAccelMax = 1.0;
constexpr double kRefRange = 100.0;   // range noise reference distance
constexpr double kSigmaRange = 1.0;   // m at the reference distance
constexpr double kSigmaAngle = 0.01;  // rad (azimuth and elevation alike)
constexpr double kMinRange = 1.0;
}  // namespace

Eigen::VectorXd RadarState::to_vector() const {
  Eigen::VectorXd v(12);
  v << x, y, z, heading, speed, turn_rate, target_pos, target_vel;
  return v;
}

RadarState RadarState::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != 12) throw std::invalid_argument("RadarState: expected 12 components");
  RadarState s;
  s.x = v[0];
  s.y = v[1];
  s.z = v[2];
  s.heading = v[3];
  s.speed = v[4];
  s.turn_rate = v[5];
  s.target_pos = v.segment<3>(6);
  s.target_vel = v.segment<3>(9);
  return s;
}

RadarState radar_step(const RadarState& s, double accel, double turn_accel) {
  const double a = std::clamp(accel, -kAccelMax, kAccelMax);
  const double al = std::clamp(turn_accel, -kTurnAccelMax, kTurnAccelMax);
  RadarState n = s;
  n.x = s.x + kRadarDt * s.speed * std::cos(s.heading);
  n.y = s.y + kRadarDt * s.speed * std::sin(s.heading);
  const double h = s.heading + kRadarDt * s.turn_rate;
  n.heading = std::atan2(std::sin(h), std::cos(h));
  n.speed = std::clamp(s.speed + kRadarDt * a, 0.0, kSpeedMax);
  n.turn_rate = std::clamp(s.turn_rate + kRadarDt * al, -kTurnRateMax, kTurnRateMax);
  n.target_pos = s.target_pos + kRadarDt * s.target_vel;
  return n;
}

double fim_reward(const Eigen::VectorXd& s) {
  Eigen::Vector3d delta = s.segment<3>(6) - s.segment<3>(0);
  double d = delta.norm();
  if (d < kMinRange) {
    delta *= kMinRange / std::max(d, 1e-12);
    d = kMinRange;
  }
  const double rho = std::max(std::hypot(delta[0], delta[1]), 1.0);
  const Eigen::Vector3d h_range = delta / d;
  const Eigen::Vector3d h_azimuth(-delta[1] / (rho * rho), delta[0] / (rho * rho), 0.0);
  const Eigen::Vector3d h_elevation(-delta[2] * delta[0] / (d * d * rho),
                                    -delta[2] * delta[1] / (d * d * rho), rho / (d * d));
  const double ratio = d / kRefRange;
  const Eigen::Vector3d inv_noise(
      1.0 / (kSigmaRange * kSigmaRange * ratio * ratio * ratio * ratio),
      1.0 / (kSigmaAngle * kSigmaAngle * ratio * ratio),
      1.0 / (kSigmaAngle * kSigmaAngle * ratio * ratio));
  Eigen::Matrix3d fim = inv_noise[0] * h_range * h_range.transpose() +
                        inv_noise[1] * h_azimuth * h_azimuth.transpose() +
                        inv_noise[2] * h_elevation * h_elevation.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(fim);
  double ld = 0.0;
  for (int i = 0; i < 3; ++i) ld += std::log(std::max(eig.eigenvalues()[i], 1e-300));
  return ld;
}

EnvModel make_radar() {
  EnvModel e;
  e.name = "radar";
  e.state_dim = 12;
  e.control_dim = 2;
  e.dt = kRadarDt;
  e.nsteps = 200;
  e.control_lo = Eigen::VectorXd(2);
  e.control_hi = Eigen::VectorXd(2);
  e.control_lo << -kAccelMax, -kTurnAccelMax;
  e.control_hi << kAccelMax, kTurnAccelMax;
  e.step = [](const Eigen::VectorXd& s, const Eigen::VectorXd& u) {
    return radar_step(RadarState::from_vector(s), u[0], u[1]).to_vector();
  };
  e.true_reward = [](const Eigen::VectorXd& s) { return fim_reward(s); };
  e.reset = [](Rng&) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(12);
    s[4] = 5.0;                       // initial radar speed
    s.segment<3>(6) << 60.0, 25.0, 8.0;
    s.segment<3>(9) << -1.0, 0.6, 0.0;
    return s;
  };
  e.is_terminal = [](const Eigen::VectorXd&) { return false; };
  // Physical units are O(100); the net sees per-component scaled values
  // clipped to +-4 so the EKF update stays conditioned.
  e.features = [](const Eigen::VectorXd& s) {
    Eigen::VectorXd scale(12);
    scale << 100, 100, 100, M_PI, 40, 2, 100, 100, 100, 2, 2, 2;
    Eigen::VectorXd f = s.cwiseQuotient(scale);
    return f.cwiseMax(-4.0).cwiseMin(4.0).eval();
  };
  e.feature_dim = 12;
  e.net_dims = {12, 16, 1};
  return e;
}

// ------------------------------------------------------------------ lookup

const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names = {"cartpole", "mountaincar", "radar"};
  return names;
}

EnvModel make_env(const std::string& name) {
  if (name == "cartpole") return make_cartpole();
  if (name == "mountaincar") return make_mountaincar();
  if (name == "radar") return make_radar();
  throw std::invalid_argument("unknown environment preset: " + name +
                              " (known: cartpole, mountaincar, radar)");
}

MppiConfig env_mppi_preset(const std::string& name) {
  MppiConfig c;
  if (name == "cartpole") {
    c.horizon = 50;
    c.num_rollouts = 2000;
    c.temperature = 1e-3;
    c.control_sigma = Eigen::VectorXd::Constant(1, 2.0);
    c.noise_beta = 0.0;
  } else if (name == "mountaincar") {
    c.horizon = 85;
    c.num_rollouts = 3500;
    c.temperature = 1e-2;
    c.control_sigma = Eigen::VectorXd::Constant(1, 0.8);
    c.noise_beta = 0.95;
  } else if (name == "radar") {
    c.horizon = 10;
    c.num_rollouts = 25;
    c.temperature = 1e-2;
    c.control_sigma = Eigen::VectorXd(2);
    c.control_sigma << 2.0, 1.0;
    c.noise_beta = 0.0;
  } else {
    throw std::invalid_argument("unknown environment preset: " + name);
  }
  const EnvModel e = make_env(name);
  c.control_lo = e.control_lo;
  c.control_hi = e.control_hi;
  c.update_iterations = 1;
  c.penalty = PenaltyMode::kCrossTerm;
  return c;
}

}  // namespace rdirl
