#include "rdirl/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rdirl/cost_net.hpp"
#include "rdirl/env.hpp"
#include "rdirl/mppi.hpp"
#include "rdirl/recursion.hpp"
#include "rdirl/rng.hpp"

namespace rdirl {
namespace {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Smallest |pre-activation| over all hidden units; a healthy margin means a
// +-h parameter perturbation cannot flip any ReLU, so central differences see
// a smooth function.
double min_hidden_preactivation(const CostNet& net, const Eigen::VectorXd& x) {
  const std::vector<int>& dims = net.dims();
  const Eigen::VectorXd& theta = net.theta();
  double margin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd a = x;
  int o = 0;
  const int L = static_cast<int>(dims.size()) - 1;
  for (int i = 0; i < L; ++i) {
    const int nin = dims[i], nout = dims[i + 1];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        theta.data() + o, nout, nin);
    o += nout * nin;
    Eigen::Map<const Eigen::VectorXd> b(theta.data() + o, nout);
    o += nout;
    Eigen::VectorXd z = W * a + b;
    if (i + 1 < L) {
      margin = std::min(margin, z.cwiseAbs().minCoeff());
      a = z.cwiseMax(0.0);
    } else {
      a = z;
    }
  }
  return margin;
}

void check_gradients(std::vector<Check>& out) {
  const std::vector<std::vector<int>> pool = {
      {3, 1}, {2, 4, 1}, {4, 8, 1}, {2, 16, 16, 1}, {5, 16, 16, 1}};
  const double h = 1e-5;
  double worst = 0.0;
  int skipped = 0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<int>& dims = pool[i % pool.size()];
    CostNet net = CostNet::init(dims, derive_seed(9001, i));
    Eigen::VectorXd x(dims.front());
    bool safe = false;
    for (int attempt = 0; attempt < 10 && !safe; ++attempt) {
      Rng rx(derive_seed(9101, static_cast<std::uint64_t>(i) * 16 + attempt));
      for (int j = 0; j < x.size(); ++j) x[j] = 1.5 * rx.normal();
      safe = min_hidden_preactivation(net, x) > 1e-3;
    }
    if (!safe) {
      ++skipped;
      continue;
    }
    Eigen::VectorXd g;
    net.backward(x, g);
    const double denom = std::max(1.0, g.cwiseAbs().maxCoeff());
    CostNet probe = net;
    double case_err = 0.0;
    for (int j = 0; j < probe.dim(); ++j) {
      const double saved = probe.theta()[j];
      probe.theta()[j] = saved + h;
      const double fp = probe.forward(x);
      probe.theta()[j] = saved - h;
      const double fm = probe.forward(x);
      probe.theta()[j] = saved;
      case_err = std::max(case_err, std::abs((fp - fm) / (2.0 * h) - g[j]) / denom);
    }
    worst = std::max(worst, case_err);
  }
  out.push_back({"gradient finite-difference audit (100 nets)", worst < 1e-4 && skipped == 0,
                 "max relative error " + num(worst) + " (tolerance 1e-4), " +
                     std::to_string(skipped) + " inputs without a safe ReLU margin"});
}

void check_bound(std::vector<Check>& out) {
  double min_slack = std::numeric_limits<double>::infinity();
  bool consistent = true;
  for (int i = 0; i < 100; ++i) {
    Rng rng(derive_seed(777, i));
    const int n = 1 + static_cast<int>(rng.raw() % 8);
    Eigen::VectorXd cd(n), cs(n), q(n);
    for (int j = 0; j < n; ++j) {
      cd[j] = 2.0 * rng.normal();
      cs[j] = 2.0 * rng.normal();
      q[j] = rng.uniform(0.1, 2.0);
    }
    const BoundCertificate c = verify_bound(cd, cs, q);
    min_slack = std::min(min_slack, c.slack);
    if (!(std::isfinite(c.nll) && std::isfinite(c.ubmm) && c.a > 0.0 && c.b >= c.a))
      consistent = false;
  }
  out.push_back({"objective upper bound (100 randomized audits)",
                 min_slack >= -1e-9 && consistent,
                 "min slack " + num(min_slack) + " (must be >= -1e-9)"});
}

void check_rls(std::vector<Check>& out) {
  const int d = 6;
  RdirlState s = rdirl_init(d, 0.5, 0.0);
  Eigen::VectorXd theta_ref = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd p_ref = 0.5 * Eigen::MatrixXd::Identity(d, d);
  Rng rng(derive_seed(4242, 0));
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd hvec(d);
    for (int j = 0; j < d; ++j) hvec[j] = rng.normal();
    const double y = rng.normal();

    // Recursive least squares via the Sherman-Morrison rank-1 identity.
    const Eigen::VectorXd ph = p_ref * hvec;
    const double denom = 1.0 + hvec.dot(ph);
    p_ref -= (ph * ph.transpose()) / denom;
    p_ref = (0.5 * (p_ref + p_ref.transpose())).eval();
    theta_ref -= p_ref * (hvec * (hvec.dot(theta_ref) - y));

    CostEval demo, samp;
    demo.grad = hvec * (hvec.dot(s.theta_hat) - y);
    demo.curv = hvec * hvec.transpose();
    samp.grad = Eigen::VectorXd::Zero(d);
    samp.curv = Eigen::MatrixXd::Zero(d, d);
    rdirl_step(s, demo, samp, InnovationMode::kRaw);

    worst = std::max(worst, (s.theta_hat - theta_ref).cwiseAbs().maxCoeff());
    worst = std::max(worst, (s.p_theta - p_ref).cwiseAbs().maxCoeff());
  }
  out.push_back({"recursive update matches recursive least squares (50 steps)", worst < 1e-10,
                 "max absolute deviation " + num(worst) + " (tolerance 1e-10)"});
}

void check_mppi(std::vector<Check>& out) {
  MppiConfig cfg;
  cfg.horizon = 15;
  cfg.num_rollouts = 200;
  cfg.temperature = 1.0;
  cfg.control_sigma = Eigen::VectorXd::Constant(1, 1.0);
  cfg.control_lo = Eigen::VectorXd::Constant(1, -5.0);
  cfg.control_hi = Eigen::VectorXd::Constant(1, 5.0);

  const auto step = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd n(1);
    n[0] = x[0] + 0.1 * u[0];
    return n;
  };
  const auto cost = [](const Eigen::MatrixXd& X) {
    return Eigen::VectorXd(X.row(0).array().square());
  };
  const auto rollout_cost = [&](const Eigen::MatrixXd& nominal, double x0) {
    Eigen::VectorXd x(1);
    x[0] = x0;
    double total = 0.0;
    for (int t = 0; t < nominal.cols(); ++t) {
      x = step(x, nominal.col(t));
      total += x[0] * x[0];
    }
    return total;
  };

  {
    MppiController a(cfg, 1, 99), b(cfg, 1, 99);
    Eigen::VectorXd x0(1);
    x0[0] = 2.0;
    const MppiPlan pa = a.plan(x0, cost, step);
    const MppiPlan pb = b.plan(x0, cost, step);
    const bool same = pa.control == pb.control && pa.weights == pb.weights &&
                      a.nominal() == b.nominal();
    out.push_back({"planner determinism (same seed, same plan)", same,
                   same ? "bitwise identical controls, weights, nominal"
                        : "plans differ between identically seeded controllers"});
    const double wsum_err = std::abs(pa.weights.sum() - 1.0);
    out.push_back({"rollout weights normalized", wsum_err < 1e-12,
                   "|sum - 1| = " + num(wsum_err) + " (tolerance 1e-12)"});
  }

  int improved = 0;
  const int trials = 50;
  for (int i = 0; i < trials; ++i) {
    Rng rng(derive_seed(5150, i));
    const double x0v = rng.uniform(-3.0, 3.0);
    Eigen::VectorXd x0(1);
    x0[0] = x0v;
    MppiController c(cfg, 1, derive_seed(5151, i));
    const double before = rollout_cost(c.nominal(), x0v);
    c.plan(x0, cost, step);
    const double after = rollout_cost(c.nominal(), x0v);
    if (after <= before) ++improved;
  }
  out.push_back({"planner improves a convex quadratic objective", improved >= 45,
                 std::to_string(improved) + "/" + std::to_string(trials) +
                     " trials improved (need >= 45)"});
}

void check_envs(std::vector<Check>& out) {
  {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
    const Eigen::VectorXd n = cartpole_step(z, 0.0);
    out.push_back({"pole balancing: upright equilibrium is a fixed point",
                   n.cwiseAbs().maxCoeff() == 0.0,
                   "max |next - state| = " + num(n.cwiseAbs().maxCoeff())});

    Eigen::VectorXd s(4);
    s << 0.0, 0.0, 0.01, 0.0;
    for (int t = 0; t < 10; ++t) s = cartpole_step(s, 0.0);
    out.push_back({"pole balancing: unforced tilt diverges", s[2] > 0.01,
                   "angle after 10 unforced steps " + num(s[2]) + " from 0.01"});
  }
  {
    Eigen::VectorXd v(2);
    v << -M_PI / 6.0, 0.0;
    const Eigen::VectorXd n = mountaincar_step(v, 0.0);
    const double drift = (n - v).cwiseAbs().maxCoeff();
    out.push_back({"hill-climb car: valley bottom is an unforced fixed point", drift < 1e-15,
                   "max state drift " + num(drift) + " (tolerance 1e-15)"});

    Eigen::VectorXd s(2);
    s << -0.5, 0.0;
    double max_x = s[0];
    for (int t = 0; t < 200; ++t) {
      s = mountaincar_step(s, 1.0);
      max_x = std::max(max_x, s[0]);
    }
    out.push_back({"hill-climb car: full throttle alone cannot reach the goal", max_x < 0.5,
                   "max position over 200 full-throttle steps " + num(max_x) +
                       " (goal at 0.5)"});
  }
  {
    RadarState s;
    s.target_pos << 30.0, 0.0, 8.0;
    s.target_vel << 0.5, 0.0, 0.0;
    const RadarState n = radar_step(s, 0.0, 0.0);
    const double radar_drift =
        std::abs(n.x) + std::abs(n.y) + std::abs(n.speed) + std::abs(n.turn_rate);
    const double target_err =
        (n.target_pos - (s.target_pos + 0.1 * s.target_vel)).cwiseAbs().maxCoeff();
    out.push_back({"radar: zero-control radar stays put, target moves at constant velocity",
                   radar_drift == 0.0 && target_err == 0.0,
                   "radar drift " + num(radar_drift) + ", target advance error " +
                       num(target_err)});

    RadarState chase;
    chase.speed = 20.0;
    chase.target_pos << 100.0, 0.0, 8.0;
    chase.target_vel << 1.0, 0.0, 0.0;
    bool closing = true;
    double prev = std::hypot(100.0, 8.0);
    for (int t = 0; t < 20; ++t) {
      chase = radar_step(chase, 0.0, 0.0);
      const double dist = (chase.target_pos - Eigen::Vector3d(chase.x, chase.y, chase.z)).norm();
      closing = closing && dist < prev;
      prev = dist;
    }
    out.push_back({"radar: head-on pursuit closes range every step", closing,
                   closing ? "range strictly decreased for 20 steps"
                           : "range failed to decrease"});

    double last = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double dist : {20.0, 50.0, 100.0, 200.0, 400.0}) {
      RadarState m;
      m.target_pos << dist, 0.0, 8.0;
      const double r = fim_reward(m.to_vector());
      monotone = monotone && std::isfinite(r) && r < last;
      last = r;
    }
    out.push_back({"radar: information reward decreases with range", monotone,
                   monotone ? "log-det FIM strictly decreasing over ranges 20..400"
                            : "log-det FIM not monotone in range"});
  }
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"gradients", "bound", "rls-equivalence",
                                                 "mppi", "envs", "all"};
  return names;
}

int run_verify_suite(const std::string& suite, std::ostream& out) {
  const auto& names = verify_suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw std::invalid_argument("unknown verify suite: " + suite);

  std::vector<Check> checks;
  if (suite == "gradients" || suite == "all") check_gradients(checks);
  if (suite == "bound" || suite == "all") check_bound(checks);
  if (suite == "rls-equivalence" || suite == "all") check_rls(checks);
  if (suite == "mppi" || suite == "all") check_mppi(checks);
  if (suite == "envs" || suite == "all") check_envs(checks);

  int failures = 0;
  for (const Check& c : checks) {
    out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    if (!c.pass) ++failures;
  }
  out << (failures == 0 ? "VERIFY OK" : "VERIFY FAILED") << " (" << checks.size() - failures
      << "/" << checks.size() << " checks passed)\n";
  return failures;
}

}  // namespace rdirl
