#pragma once

#include <Eigen/Dense>

#include "rdirl/cost_net.hpp"

namespace rdirl {

// State of the recursive second-order (EKF-style) parameter estimator.
struct RdirlState {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd p_theta;  // symmetric positive definite
  Eigen::MatrixXd q_theta;  // process-noise regularizer, PSD
  long step_index = 0;
};

// p_theta = p0_scale * I, q_theta = q_scale * I, theta_hat = 0 (callers
// typically overwrite theta_hat with the cost net's parameters).
RdirlState rdirl_init(int d_theta, double p0_scale, double q_scale);

enum class InnovationMode {
  kProjected,  // eigenvalue-clamp the curvature difference to be PSD (default)
  kRaw,        // use the symmetrized curvature difference as-is
};

// One recursive update:
//   P <- [(P + Q)^-1 + Pi(H_demo - H_samp)]^-1
//   theta <- theta - P * (g_demo - g_samp)
// where Pi is the PSD projection (or identity in raw mode). When both evals
// carry no explicit curvature, the Gauss-Newton difference
// g_d g_d^T - g_s g_s^T is used; its PSD projection is computed by an exact
// rank-2 fast path (identical to a full eigenvalue clamp because the ridge
// terms cancel in the difference). Inversions are Cholesky with a one-shot
// jitter retry (+1e-10 I); a second failure throws. Enforces P symmetry and
// positive definiteness after every step.
void rdirl_step(RdirlState& s, const CostEval& demo, const CostEval& samp,
                InnovationMode mode = InnovationMode::kProjected, double lam_min = 1e-8);

// PSD projection of g_d g_d^T - g_s g_s^T by eigenvalue clamping at lam_min:
// exact rank-2 computation (QR of [g_d g_s] plus a 2x2 eigensolve), returning
// a dense d x d matrix. Equals clamping all eigenvalues of the full matrix.
Eigen::MatrixXd psd_project_rank2(const Eigen::VectorXd& gd, const Eigen::VectorXd& gs,
                                  double lam_min);

// Full-eigendecomposition PSD projection of a symmetric matrix (clamp all
// eigenvalues at lam_min). O(d^3); reference path for explicit curvatures.
Eigen::MatrixXd psd_project_full(const Eigen::MatrixXd& m, double lam_min);

// Throws unless m is symmetric to 1e-12 (max-abs) and positive definite.
void check_spd(const Eigen::MatrixXd& m, const char* what);

// Sample-based maximum-entropy IRL negative log-likelihood:
//   mean(costs_demo) + log( (1/M) sum_j exp(-costs_samp[j]) / q_samp[j] )
// computed with log-sum-exp stabilization.
double loss_nll(const Eigen::VectorXd& costs_demo, const Eigen::VectorXd& costs_samp,
                const Eigen::VectorXd& q_samp);

// Moment-matching training loss sum_i (costs_demo[i] - costs_samp[i]);
// requires equal counts.
double loss_ubmm(const Eigen::VectorXd& costs_demo, const Eigen::VectorXd& costs_samp);

// Certificate that the moment-matching objective, with its additive constant
// retained, upper-bounds the negative log-likelihood. `ubmm` here is the full
// bound value mean(costs_demo) + mean(-costs_samp - log q) - K with
// K = log a + log b - 2 log((a+b)/2) built from the extreme importance
// weights a = min_j y_j, b = max_j y_j, y_j = exp(-costs_samp[j]) / q_samp[j].
// slack = ubmm - nll is >= 0 up to roundoff.
struct BoundCertificate {
  double nll = 0.0;
  double ubmm = 0.0;
  double a = 0.0;
  double b = 0.0;
  // Both sign conventions of the additive constant are reported: k is
  // log a + log b - 2 log((a+b)/2) (<= 0 by the AM-GM inequality) and
  // minus_k = -k is the nonnegative amount added on top of the averaged log
  // importance weights to dominate the log-sum-exp term.
  double k = 0.0;
  double minus_k = 0.0;
  double slack = 0.0;
};

BoundCertificate verify_bound(const Eigen::VectorXd& costs_demo,
                              const Eigen::VectorXd& costs_samp,
                              const Eigen::VectorXd& q_samp);

}  // namespace rdirl
