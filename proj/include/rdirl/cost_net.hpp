#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace rdirl {

// Fully connected cost network c_theta(x): ReLU hidden layers, linear scalar
// output. Parameters live in one flat vector `theta` packed layer by layer as
// [W1 row-major, b1, W2 row-major, b2, ...]; W has shape (out, in). The ReLU
// subgradient at exactly zero is taken as zero.
class CostNet {
 public:
  CostNet() = default;
  CostNet(std::vector<int> dims, Eigen::VectorXd theta);

  // Zero-mean scaled-uniform init: every weight and bias of a layer is drawn
  // U(-1,1)/sqrt(fan_in). Deterministic in `seed`.
  static CostNet init(const std::vector<int>& dims, std::uint64_t seed);

  static int param_count(const std::vector<int>& dims);

  int dim() const { return static_cast<int>(theta_.size()); }
  int input_dim() const { return dims_.front(); }
  const std::vector<int>& dims() const { return dims_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  Eigen::VectorXd& theta() { return theta_; }

  double forward(const Eigen::VectorXd& x) const;

  // X holds one state per column (input_dim x K); returns K costs.
  Eigen::VectorXd forward_batch(const Eigen::MatrixXd& X) const;

  // Exact reverse-mode gradient of the scalar output w.r.t. theta.
  // Returns the cost; `grad` is resized and filled.
  double backward(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;

  // Gauss-Newton curvature surrogate g g^T + lambda_gn * I.
  static Eigen::MatrixXd curvature(const Eigen::VectorXd& grad, double lambda_gn);

  // Exact Hessian-vector product d/da [grad(theta + a v)] at a=0, by
  // forward-mode differentiation of the reverse pass (the ReLU activation
  // pattern is held fixed, i.e. the almost-everywhere second derivative).
  Eigen::VectorXd hessian_vector_product(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& v) const;

  // Exact parameter Hessian of the scalar cost, assembled column by column
  // from Hessian-vector products and symmetrized. Indefinite in general;
  // diagnostic/oracle use only.
  Eigen::MatrixXd exact_hessian(const Eigen::VectorXd& x) const;

  // Sum of per-state costs over the columns of `states`.
  double trajectory_cost(const Eigen::MatrixXd& states) const;

 private:
  std::vector<int> dims_;
  Eigen::VectorXd theta_;
};

struct CostEval {
  double cost = 0.0;
  Eigen::VectorXd grad;
  // Optional explicit curvature. When empty, consumers use the Gauss-Newton
  // form implied by `grad`.
  Eigen::MatrixXd curv;
};

// Default: curv = grad grad^T + lambda_gn I (Gauss-Newton). With
// use_exact_hessian, curv = symmetrized exact Hessian + lambda_gn I instead —
// then curv need not be PSD; the recursive update's projection handles that.
CostEval cost_backward(const CostNet& net, const Eigen::VectorXd& x, double lambda_gn,
                       bool use_exact_hessian = false);

// Componentwise sum of cost_backward over the columns of `states` (cost, grad,
// and curvature all add). Throws on an empty state set.
CostEval trajectory_eval(const CostNet& net, const Eigen::MatrixXd& states, double lambda_gn);

}  // namespace rdirl
