#include "rdirl/baselines.hpp"

#include <stdexcept>

namespace rdirl {

SgdState sgd_init(int d_theta, double learning_rate) {
  if (d_theta < 1) throw std::invalid_argument("sgd_init: d_theta must be positive");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("sgd_init: learning_rate must be positive");
  SgdState s;
  s.theta = Eigen::VectorXd::Zero(d_theta);
  s.learning_rate = learning_rate;
  s.step_index = 0;
  return s;
}

void sgd_step(SgdState& s, const CostEval& demo, const CostEval& samp) {
  if (demo.grad.size() != s.theta.size() || samp.grad.size() != s.theta.size())
    throw std::invalid_argument("sgd_step: gradient dimension mismatch");
  if (!demo.grad.allFinite() || !samp.grad.allFinite())
    throw std::runtime_error("sgd_step: non-finite gradient");
  s.theta -= s.learning_rate * (demo.grad - samp.grad);
  ++s.step_index;
}

}  // namespace rdirl
