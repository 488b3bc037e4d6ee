#include "rdirl/mppi.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rdirl {

void MppiConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("mppi: horizon must be >= 1");
  if (num_rollouts < 2) throw std::invalid_argument("mppi: num_rollouts must be >= 2");
  if (!(temperature > 0.0)) throw std::invalid_argument("mppi: temperature must be > 0");
  const int ud = control_dim();
  if (ud < 1) throw std::invalid_argument("mppi: control_sigma must be non-empty");
  if (control_lo.size() != ud || control_hi.size() != ud)
    throw std::invalid_argument("mppi: control bounds must match control_sigma size");
  for (int r = 0; r < ud; ++r) {
    if (!(control_sigma[r] > 0.0))
      throw std::invalid_argument("mppi: control_sigma entries must be > 0");
    if (!(control_lo[r] < control_hi[r]))
      throw std::invalid_argument("mppi: control_lo must be strictly below control_hi");
  }
  if (noise_beta < 0.0 || noise_beta >= 1.0)
    throw std::invalid_argument("mppi: noise_beta must be in [0, 1)");
  if (update_iterations < 1)
    throw std::invalid_argument("mppi: update_iterations must be >= 1");
}

int rollout_thread_count() {
  static const int n = [] {
    const char* v = std::getenv("RDIRL_THREADS");
    if (!v) return 1;
    const int p = std::atoi(v);
    return p > 0 ? p : 1;
  }();
  return n;
}

MppiController::MppiController(MppiConfig cfg, int state_dim, std::uint64_t seed)
    : cfg_(std::move(cfg)), state_dim_(state_dim), rng_(seed) {
  cfg_.validate();
  if (state_dim_ < 1) throw std::invalid_argument("mppi: state_dim must be >= 1");
  nominal_ = Eigen::MatrixXd::Zero(cfg_.control_dim(), cfg_.horizon);
}

static void clamp_columns(Eigen::MatrixXd& m, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  for (int r = 0; r < m.rows(); ++r)
    m.row(r) = m.row(r).cwiseMax(lo[r]).cwiseMin(hi[r]);
}

MppiPlan MppiController::plan(
    const Eigen::VectorXd& x0,
    const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& cost_batch,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>&
        step) {
  if (x0.size() != state_dim_) throw std::invalid_argument("mppi: state dimension mismatch");
  if (!x0.allFinite()) throw std::runtime_error("mppi: non-finite planning state");
  const int H = cfg_.horizon, K = cfg_.num_rollouts, ud = cfg_.control_dim();
  const Eigen::ArrayXd inv_sigma2 = cfg_.control_sigma.array().square().inverse();
  const int nthreads = rollout_thread_count();

  MppiPlan out;
  std::vector<Eigen::MatrixXd> eps(H, Eigen::MatrixXd(ud, K));
  Eigen::MatrixXd u_t(ud, K), states(state_dim_, K);
  const double ar_fresh = std::sqrt(1.0 - cfg_.noise_beta * cfg_.noise_beta);

  for (int it = 0; it < cfg_.update_iterations; ++it) {
    for (int t = 0; t < H; ++t)
      for (int k = 0; k < K; ++k)
        for (int r = 0; r < ud; ++r) {
          const double fresh = rng_.normal() * cfg_.control_sigma[r];
          eps[t](r, k) = t == 0 ? fresh : cfg_.noise_beta * eps[t - 1](r, k) + ar_fresh * fresh;
        }

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(K);
    states.colwise() = x0;
    for (int t = 0; t < H; ++t) {
      u_t = eps[t];
      u_t.colwise() += nominal_.col(t);
      clamp_columns(u_t, cfg_.control_lo, cfg_.control_hi);

      auto advance = [&](int k0, int k1) {
        for (int k = k0; k < k1; ++k) states.col(k) = step(states.col(k), u_t.col(k));
      };
      if (nthreads > 1) {
        std::vector<std::thread> pool;
        const int chunk = (K + nthreads - 1) / nthreads;
        for (int c = 0; c < nthreads; ++c) {
          const int k0 = c * chunk, k1 = std::min(K, k0 + chunk);
          if (k0 < k1) pool.emplace_back(advance, k0, k1);
        }
        for (auto& th : pool) th.join();
      } else {
        advance(0, K);
      }
      if (t == 0) {
        out.first_states = states;
        out.first_controls = u_t;
      }
      scores += cost_batch(states);

      if (cfg_.penalty == PenaltyMode::kCrossTerm) {
        const Eigen::VectorXd a =
            (nominal_.col(t).array() * inv_sigma2).matrix() * cfg_.temperature;
        Eigen::MatrixXd eps_eff = u_t;
        eps_eff.colwise() -= nominal_.col(t);
        scores += eps_eff.transpose() * a;
      } else {
        scores += (0.5 * cfg_.temperature) *
                  (u_t.array().square().colwise() * inv_sigma2).colwise().sum().matrix().transpose();
      }
    }

    if (scores.hasNaN())
      throw std::runtime_error(
          "mppi: rollout scores are non-finite; check the cost function and dynamics");
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k)
      if (std::isfinite(scores[k])) best = std::min(best, scores[k]);
    if (!std::isfinite(best))
      throw std::runtime_error(
          "mppi: all rollout weights vanished (every score non-finite); "
          "increase temperature or rescale the cost");
    Eigen::VectorXd w(K);
    for (int k = 0; k < K; ++k)
      w[k] = std::isfinite(scores[k]) ? std::exp(-(scores[k] - best) / cfg_.temperature) : 0.0;
    const double z = w.sum();
    if (!(z > 0.0) || !std::isfinite(z))
      throw std::runtime_error(
          "mppi: all rollout weights vanished; increase temperature or rescale the cost");
    w /= z;

    for (int t = 0; t < H; ++t) nominal_.col(t) += eps[t] * w;
    clamp_columns(nominal_, cfg_.control_lo, cfg_.control_hi);
    out.weights = std::move(w);
  }

  out.control = nominal_.col(0);
  return out;
}

void MppiController::set_nominal(const Eigen::MatrixXd& nominal) {
  if (nominal.rows() != nominal_.rows() || nominal.cols() != nominal_.cols())
    throw std::invalid_argument("set_nominal: expected control_dim x horizon");
  nominal_ = nominal;
}

void MppiController::shift() {
  const int H = cfg_.horizon;
  if (H > 1) {
    Eigen::MatrixXd shifted(nominal_.rows(), H);
    shifted.leftCols(H - 1) = nominal_.rightCols(H - 1);
    shifted.col(H - 1) = nominal_.col(H - 1);
    nominal_ = std::move(shifted);
  }
}

int sample_policy_step(const MppiPlan& plan, Rng& rng) {
  if (plan.weights.size() < 1) throw std::invalid_argument("sample_policy_step: empty plan");
  return rng.categorical(plan.weights);
}

}  // namespace rdirl
