#include "rdirl/recursion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rdirl {

RdirlState rdirl_init(int d_theta, double p0_scale, double q_scale) {
  if (d_theta < 1) throw std::invalid_argument("rdirl_init: d_theta must be positive");
  if (!(p0_scale > 0.0)) throw std::invalid_argument("rdirl_init: p0_scale must be positive");
  if (q_scale < 0.0) throw std::invalid_argument("rdirl_init: q_scale must be non-negative");
  RdirlState s;
  s.theta_hat = Eigen::VectorXd::Zero(d_theta);
  s.p_theta = p0_scale * Eigen::MatrixXd::Identity(d_theta, d_theta);
  s.q_theta = q_scale * Eigen::MatrixXd::Identity(d_theta, d_theta);
  s.step_index = 0;
  return s;
}

Eigen::MatrixXd psd_project_rank2(const Eigen::VectorXd& gd, const Eigen::VectorXd& gs,
                                  double lam_min) {
  const int d = static_cast<int>(gd.size());
  if (d == 1) {
    Eigen::MatrixXd b(1, 1);
    b(0, 0) = std::max(gd[0] * gd[0] - gs[0] * gs[0], lam_min);
    return b;
  }
  Eigen::MatrixXd u(d, 2);
  u.col(0) = gd;
  u.col(1) = gs;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, 2);
  Eigen::MatrixXd r = qr.matrixQR().topRows(2).triangularView<Eigen::Upper>();
  // gd gd^T - gs gs^T = Q (r1 r1^T - r2 r2^T) Q^T with r_i the columns of R.
  Eigen::Matrix2d core =
      r.col(0) * r.col(0).transpose() - r.col(1) * r.col(1).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (core + core.transpose()));
  Eigen::Vector2d mu = eig.eigenvalues().cwiseMax(lam_min);
  Eigen::MatrixXd v = q * eig.eigenvectors();
  // lam_min everywhere, plus the clamped excess inside the span.
  Eigen::MatrixXd b = v * (mu.array() - lam_min).matrix().asDiagonal() * v.transpose();
  b.diagonal().array() += lam_min;
  return 0.5 * (b + b.transpose());
}

Eigen::MatrixXd psd_project_full(const Eigen::MatrixXd& m, double lam_min) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd mu = eig.eigenvalues().cwiseMax(lam_min);
  Eigen::MatrixXd b = eig.eigenvectors() * mu.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (b + b.transpose());
}

void check_spd(const Eigen::MatrixXd& m, const char* what) {
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym < 1e-12))
    throw std::runtime_error(std::string(what) + ": matrix not symmetric (max-abs " +
                             std::to_string(asym) + ")");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": matrix not positive definite");
}

// SPD inversion via Cholesky with a single jitter retry.
static Eigen::MatrixXd spd_inverse(Eigen::MatrixXd m, const char* what) {
  const int d = static_cast<int>(m.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    m.diagonal().array() += 1e-10;
    llt.compute(m);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error(std::string(what) +
                               ": Cholesky failed even after 1e-10 jitter; "
                               "matrix is numerically indefinite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(d, d));
}

void rdirl_step(RdirlState& s, const CostEval& demo, const CostEval& samp,
                InnovationMode mode, double lam_min) {
  const int d = static_cast<int>(s.theta_hat.size());
  if (demo.grad.size() != d || samp.grad.size() != d)
    throw std::invalid_argument("rdirl_step: gradient dimension mismatch");
  if (!demo.grad.allFinite() || !samp.grad.allFinite())
    throw std::runtime_error("rdirl_step: non-finite gradient");

  Eigen::MatrixXd innovation_curv;
  const bool explicit_curv = demo.curv.size() > 0 || samp.curv.size() > 0;
  if (explicit_curv) {
    if (demo.curv.rows() != d || demo.curv.cols() != d || samp.curv.rows() != d ||
        samp.curv.cols() != d)
      throw std::invalid_argument("rdirl_step: curvature dimension mismatch");
    Eigen::MatrixXd diff = demo.curv - samp.curv;
    innovation_curv = (mode == InnovationMode::kProjected)
                          ? psd_project_full(diff, lam_min)
                          : Eigen::MatrixXd(0.5 * (diff + diff.transpose()));
  } else if (mode == InnovationMode::kProjected) {
    innovation_curv = psd_project_rank2(demo.grad, samp.grad, lam_min);
  } else {
    innovation_curv = demo.grad * demo.grad.transpose() - samp.grad * samp.grad.transpose();
  }

  Eigen::MatrixXd predicted_info = spd_inverse(s.p_theta + s.q_theta, "rdirl_step predict");
  Eigen::MatrixXd p_new = spd_inverse(predicted_info + innovation_curv, "rdirl_step update");
  // The sum must be materialized before the assignment: aliasing the transpose
  // during a write to the same matrix leaves a quarter of the asymmetry behind.
  p_new = (0.5 * (p_new + p_new.transpose())).eval();
  check_spd(p_new, "rdirl_step post");

  s.theta_hat -= p_new * (demo.grad - samp.grad);
  if (!s.theta_hat.allFinite()) throw std::runtime_error("rdirl_step: non-finite parameters");
  s.p_theta = std::move(p_new);
  ++s.step_index;
}

static double logaddexp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

double loss_nll(const Eigen::VectorXd& costs_demo, const Eigen::VectorXd& costs_samp,
                const Eigen::VectorXd& q_samp) {
  if (costs_samp.size() != q_samp.size())
    throw std::invalid_argument("loss_nll: sample/likelihood size mismatch");
  if (costs_demo.size() < 1 || costs_samp.size() < 1)
    throw std::invalid_argument("loss_nll: empty trajectory set");
  if ((q_samp.array() <= 0.0).any())
    throw std::invalid_argument("loss_nll: sample likelihoods must be positive");
  const Eigen::ArrayXd ln_y = -costs_samp.array() - q_samp.array().log();
  const double m = ln_y.maxCoeff();
  const double lse = m + std::log((ln_y - m).exp().sum());
  return costs_demo.mean() + lse - std::log(static_cast<double>(costs_samp.size()));
}

double loss_ubmm(const Eigen::VectorXd& costs_demo, const Eigen::VectorXd& costs_samp) {
  if (costs_demo.size() != costs_samp.size())
    throw std::invalid_argument("loss_ubmm: demo/sample counts must match");
  return (costs_demo - costs_samp).sum();
}

BoundCertificate verify_bound(const Eigen::VectorXd& costs_demo,
                              const Eigen::VectorXd& costs_samp,
                              const Eigen::VectorXd& q_samp) {
  if (costs_demo.size() != costs_samp.size())
    throw std::invalid_argument("verify_bound: demo/sample counts must match");
  BoundCertificate c;
  c.nll = loss_nll(costs_demo, costs_samp, q_samp);
  const Eigen::ArrayXd ln_y = -costs_samp.array() - q_samp.array().log();
  const double ln_a = ln_y.minCoeff();
  const double ln_b = ln_y.maxCoeff();
  const double ln_mid = logaddexp(ln_a, ln_b) - std::log(2.0);
  const double k = ln_a + ln_b - 2.0 * ln_mid;  // <= 0 by AM-GM
  c.a = std::exp(ln_a);
  c.b = std::exp(ln_b);
  c.k = k;
  c.minus_k = -k;
  c.ubmm = costs_demo.mean() + ln_y.mean() - k;
  c.slack = c.ubmm - c.nll;
  return c;
}

}  // namespace rdirl
