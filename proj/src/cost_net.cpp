#include "rdirl/cost_net.hpp"

#include <cmath>
#include <stdexcept>

#include "rdirl/rng.hpp"

namespace rdirl {

static void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("cost net needs >= 2 layer dims");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("cost net layer dims must be positive");
  if (dims.back() != 1) throw std::invalid_argument("cost net output dim must be 1");
}

CostNet::CostNet(std::vector<int> dims, Eigen::VectorXd theta)
    : dims_(std::move(dims)), theta_(std::move(theta)) {
  check_dims(dims_);
  if (theta_.size() != param_count(dims_))
    throw std::invalid_argument("theta size does not match layer dims");
}

int CostNet::param_count(const std::vector<int>& dims) {
  check_dims(dims);
  int n = 0;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) n += dims[i + 1] * dims[i] + dims[i + 1];
  return n;
}

CostNet CostNet::init(const std::vector<int>& dims, std::uint64_t seed) {
  check_dims(dims);
  Rng rng(seed);
  Eigen::VectorXd theta(param_count(dims));
  int o = 0;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[i]));
    const int n = dims[i + 1] * dims[i] + dims[i + 1];
    for (int k = 0; k < n; ++k) theta[o + k] = rng.uniform(-1.0, 1.0) * scale;
    o += n;
  }
  return CostNet(dims, std::move(theta));
}

double CostNet::forward(const Eigen::VectorXd& x) const {
  if (x.size() != dims_.front()) throw std::invalid_argument("forward: input dim mismatch");
  Eigen::VectorXd a = x;
  int o = 0;
  const int L = static_cast<int>(dims_.size()) - 1;
  for (int i = 0; i < L; ++i) {
    const int nin = dims_[i], nout = dims_[i + 1];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        theta_.data() + o, nout, nin);
    o += nout * nin;
    Eigen::Map<const Eigen::VectorXd> b(theta_.data() + o, nout);
    o += nout;
    Eigen::VectorXd z = W * a + b;
    a = (i + 1 < L) ? z.cwiseMax(0.0).eval() : z;
  }
  return a[0];
}

Eigen::VectorXd CostNet::forward_batch(const Eigen::MatrixXd& X) const {
  if (X.rows() != dims_.front()) throw std::invalid_argument("forward_batch: input dim mismatch");
  Eigen::MatrixXd a = X;
  int o = 0;
  const int L = static_cast<int>(dims_.size()) - 1;
  for (int i = 0; i < L; ++i) {
    const int nin = dims_[i], nout = dims_[i + 1];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        theta_.data() + o, nout, nin);
    o += nout * nin;
    Eigen::Map<const Eigen::VectorXd> b(theta_.data() + o, nout);
    o += nout;
    Eigen::MatrixXd z = (W * a).colwise() + b;
    a = (i + 1 < L) ? z.cwiseMax(0.0).eval() : z;
  }
  return a.row(0).transpose();
}

double CostNet::backward(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  if (x.size() != dims_.front()) throw std::invalid_argument("backward: input dim mismatch");
  const int L = static_cast<int>(dims_.size()) - 1;
  std::vector<Eigen::VectorXd> acts(L + 1);
  acts[0] = x;
  std::vector<int> offs(L);
  int o = 0;
  for (int i = 0; i < L; ++i) {
    const int nin = dims_[i], nout = dims_[i + 1];
    offs[i] = o;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        theta_.data() + o, nout, nin);
    Eigen::Map<const Eigen::VectorXd> b(theta_.data() + o + nout * nin, nout);
    Eigen::VectorXd z = W * acts[i] + b;
    acts[i + 1] = (i + 1 < L) ? z.cwiseMax(0.0).eval() : z;
    o += nout * nin + nout;
  }
  grad.resize(theta_.size());
  Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);
  for (int i = L - 1; i >= 0; --i) {
    const int nin = dims_[i], nout = dims_[i + 1];
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gW(
        grad.data() + offs[i], nout, nin);
    gW = delta * acts[i].transpose();
    grad.segment(offs[i] + nout * nin, nout) = delta;
    if (i > 0) {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
          theta_.data() + offs[i], nout, nin);
      // ReLU subgradient: strictly-positive pre-activations pass gradient.
      delta = (W.transpose() * delta).cwiseProduct(
          (acts[i].array() > 0.0).cast<double>().matrix());
    }
  }
  return acts[L][0];
}

Eigen::MatrixXd CostNet::curvature(const Eigen::VectorXd& grad, double lambda_gn) {
  Eigen::MatrixXd h = grad * grad.transpose();
  h.diagonal().array() += lambda_gn;
  return h;
}

Eigen::VectorXd CostNet::hessian_vector_product(const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& v) const {
  if (x.size() != dims_.front())
    throw std::invalid_argument("hessian_vector_product: input dim mismatch");
  if (v.size() != theta_.size())
    throw std::invalid_argument("hessian_vector_product: direction dim mismatch");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int L = static_cast<int>(dims_.size()) - 1;
  std::vector<Eigen::VectorXd> acts(L + 1), acts_t(L + 1);
  acts[0] = x;
  acts_t[0] = Eigen::VectorXd::Zero(x.size());
  std::vector<int> offs(L);
  int o = 0;
  for (int i = 0; i < L; ++i) {
    const int nin = dims_[i], nout = dims_[i + 1];
    offs[i] = o;
    Eigen::Map<const RowMat> W(theta_.data() + o, nout, nin);
    Eigen::Map<const RowMat> Wt(v.data() + o, nout, nin);
    Eigen::Map<const Eigen::VectorXd> b(theta_.data() + o + nout * nin, nout);
    Eigen::Map<const Eigen::VectorXd> bt(v.data() + o + nout * nin, nout);
    Eigen::VectorXd z = W * acts[i] + b;
    Eigen::VectorXd zt = Wt * acts[i] + W * acts_t[i] + bt;
    if (i + 1 < L) {
      const Eigen::ArrayXd mask = (z.array() > 0.0).cast<double>();
      acts[i + 1] = z.cwiseMax(0.0);
      acts_t[i + 1] = (zt.array() * mask).matrix();
    } else {
      acts[i + 1] = z;
      acts_t[i + 1] = zt;
    }
    o += nout * nin + nout;
  }

  Eigen::VectorXd hv(theta_.size());
  Eigen::VectorXd delta = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd delta_t = Eigen::VectorXd::Zero(1);
  for (int i = L - 1; i >= 0; --i) {
    const int nin = dims_[i], nout = dims_[i + 1];
    Eigen::Map<RowMat> gWt(hv.data() + offs[i], nout, nin);
    gWt = delta_t * acts[i].transpose() + delta * acts_t[i].transpose();
    hv.segment(offs[i] + nout * nin, nout) = delta_t;
    if (i > 0) {
      Eigen::Map<const RowMat> W(theta_.data() + offs[i], nout, nin);
      Eigen::Map<const RowMat> Wt(v.data() + offs[i], nout, nin);
      const Eigen::ArrayXd mask = (acts[i].array() > 0.0).cast<double>();
      Eigen::VectorXd nt = Wt.transpose() * delta + W.transpose() * delta_t;
      delta = ((W.transpose() * delta).array() * mask).matrix();
      delta_t = (nt.array() * mask).matrix();
    }
  }
  return hv;
}

Eigen::MatrixXd CostNet::exact_hessian(const Eigen::VectorXd& x) const {
  const int d = dim();
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) {
    e[j] = 1.0;
    h.col(j) = hessian_vector_product(x, e);
    e[j] = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

double CostNet::trajectory_cost(const Eigen::MatrixXd& states) const {
  return forward_batch(states).sum();
}

CostEval cost_backward(const CostNet& net, const Eigen::VectorXd& x, double lambda_gn,
                       bool use_exact_hessian) {
  CostEval e;
  e.cost = net.backward(x, e.grad);
  if (use_exact_hessian) {
    e.curv = net.exact_hessian(x);
    e.curv.diagonal().array() += lambda_gn;
  } else {
    e.curv = CostNet::curvature(e.grad, lambda_gn);
  }
  return e;
}

CostEval trajectory_eval(const CostNet& net, const Eigen::MatrixXd& states, double lambda_gn) {
  if (states.cols() < 1) throw std::invalid_argument("trajectory_eval: empty state set");
  CostEval total;
  total.grad = Eigen::VectorXd::Zero(net.dim());
  total.curv = Eigen::MatrixXd::Zero(net.dim(), net.dim());
  for (int k = 0; k < states.cols(); ++k) {
    const CostEval e = cost_backward(net, states.col(k), lambda_gn);
    total.cost += e.cost;
    total.grad += e.grad;
    total.curv += e.curv;
  }
  return total;
}

}  // namespace rdirl
