#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <limits>

#include "rdirl/baselines.hpp"
#include "rdirl/recursion.hpp"
#include "rdirl/rng.hpp"

using rdirl::CostEval;
using rdirl::SgdState;

namespace {

CostEval grad_eval(const Eigen::VectorXd& g) {
  CostEval e;
  e.grad = g;
  return e;
}

CostEval grad_eval(const Eigen::VectorXd& g, const Eigen::MatrixXd& h) {
  CostEval e;
  e.grad = g;
  e.curv = h;
  return e;
}

}  // namespace

TEST_CASE("first-order learner initialization") {
  const SgdState s = rdirl::sgd_init(4, 1e-4);
  CHECK(s.theta == Eigen::VectorXd::Zero(4));
  CHECK(s.learning_rate == 1e-4);
  CHECK(s.step_index == 0);
  CHECK_THROWS(rdirl::sgd_init(0, 1e-4));
  CHECK_THROWS(rdirl::sgd_init(-1, 1e-4));
  CHECK_THROWS(rdirl::sgd_init(4, 0.0));
  CHECK_THROWS(rdirl::sgd_init(4, -1e-4));
}

TEST_CASE("scalar first-order step moves against the innovation") {
  SgdState s = rdirl::sgd_init(1, 0.1);
  Eigen::VectorXd gd(1), gs(1);
  gd << 3.0;
  gs << 1.0;
  rdirl::sgd_step(s, grad_eval(gd), grad_eval(gs));
  CHECK(s.theta[0] == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(s.step_index == 1);
}

TEST_CASE("matched gradients are a fixed point of both learners") {
  rdirl::Rng rng(7);
  const int d = 5;
  SgdState sgd = rdirl::sgd_init(d, 0.05);
  rdirl::RdirlState rec = rdirl::rdirl_init(d, 0.01, 1e-4);
  for (int i = 0; i < d; ++i) {
    sgd.theta[i] = rng.normal();
    rec.theta_hat[i] = sgd.theta[i];
  }
  const Eigen::VectorXd frozen = sgd.theta;
  for (int t = 0; t < 30; ++t) {
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) g[i] = rng.normal();
    rdirl::sgd_step(sgd, grad_eval(g), grad_eval(g));
    rdirl::rdirl_step(rec, grad_eval(g), grad_eval(g));
    CHECK(sgd.theta == frozen);
    CHECK(rec.theta_hat == frozen);
  }
}

TEST_CASE("first-order updates are deterministic") {
  auto run = [] {
    SgdState s = rdirl::sgd_init(3, 0.01);
    rdirl::Rng rng(11);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd gd(3), gs(3);
      for (int i = 0; i < 3; ++i) {
        gd[i] = rng.normal();
        gs[i] = rng.normal();
      }
      rdirl::sgd_step(s, grad_eval(gd), grad_eval(gs));
    }
    return s.theta;
  };
  CHECK(run() == run());
}

TEST_CASE("malformed gradients are rejected without touching the state") {
  SgdState s = rdirl::sgd_init(3, 0.01);
  const Eigen::VectorXd good = Eigen::VectorXd::Ones(3);
  CHECK_THROWS(rdirl::sgd_step(s, grad_eval(Eigen::VectorXd::Ones(2)), grad_eval(good)));
  Eigen::VectorXd bad = good;
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS(rdirl::sgd_step(s, grad_eval(bad), grad_eval(good)));
  CHECK(s.theta == Eigen::VectorXd::Zero(3));
  CHECK(s.step_index == 0);
}

TEST_CASE("second-order learner needs far fewer steps on a quadratic stream") {
  // Streaming least squares y = h' theta*: the covariance-weighted learner
  // should reach a 1e-3 parameter error in at most as many steps as plain
  // gradient descent, and in practice orders of magnitude fewer. A weak
  // prior (large initial covariance) keeps the prior-bias decay from
  // dominating the comparison.
  const int d = 4;
  const int max_steps = 50000;
  rdirl::Rng setup(21);
  Eigen::VectorXd theta_star(d);
  for (int i = 0; i < d; ++i) theta_star[i] = setup.normal();

  auto run_rdirl = [&]() -> int {
    rdirl::RdirlState s = rdirl::rdirl_init(d, 1e4, 0.0);
    rdirl::Rng rng(22);
    const Eigen::MatrixXd zero_curv = Eigen::MatrixXd::Zero(d, d);
    for (int t = 1; t <= max_steps; ++t) {
      Eigen::VectorXd h(d);
      for (int i = 0; i < d; ++i) h[i] = rng.normal();
      const Eigen::VectorXd g = h * (h.dot(s.theta_hat) - h.dot(theta_star));
      rdirl::rdirl_step(s, grad_eval(g, (h * h.transpose()).eval()),
                        grad_eval(Eigen::VectorXd::Zero(d), zero_curv),
                        rdirl::InnovationMode::kRaw);
      if ((s.theta_hat - theta_star).norm() < 1e-3) return t;
    }
    return max_steps + 1;
  };

  auto run_sgd = [&]() -> int {
    SgdState s = rdirl::sgd_init(d, 1e-3);
    rdirl::Rng rng(22);  // identical measurement stream
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    for (int t = 1; t <= max_steps; ++t) {
      Eigen::VectorXd h(d);
      for (int i = 0; i < d; ++i) h[i] = rng.normal();
      const Eigen::VectorXd g = h * (h.dot(s.theta) - h.dot(theta_star));
      rdirl::sgd_step(s, grad_eval(g), grad_eval(zero));
      if ((s.theta - theta_star).norm() < 1e-3) return t;
    }
    return max_steps + 1;
  };

  const int n_rdirl = run_rdirl();
  const int n_sgd = run_sgd();
  CHECK(n_rdirl <= max_steps);
  CHECK(n_sgd <= max_steps);
  CHECK(n_rdirl <= n_sgd);
  CHECK(n_rdirl * 10 <= n_sgd);  // decisive, not marginal
}
