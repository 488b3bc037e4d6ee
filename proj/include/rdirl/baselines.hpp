#pragma once

#include <Eigen/Dense>

#include "rdirl/cost_net.hpp"

namespace rdirl {

// Online first-order moment-matching learner: plain gradient descent on the
// per-sample cost difference, the first-order analogue of the recursive
// second-order update with P replaced by learning_rate * I.
struct SgdState {
  Eigen::VectorXd theta;
  double learning_rate = 1e-4;
  long step_index = 0;
};

SgdState sgd_init(int d_theta, double learning_rate);

// theta <- theta - learning_rate * (g_demo - g_samp). Throws on non-finite
// gradients or dimension mismatch.
void sgd_step(SgdState& s, const CostEval& demo, const CostEval& samp);

}  // namespace rdirl
