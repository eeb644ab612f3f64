#include "fgwc/ot.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgwc {

namespace {

constexpr double kNuFloor = 1e-6;

// log(sum(exp(x))) over one row, max-shifted. All -inf rows stay -inf.
double lse(const Eigen::ArrayXd& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x - m).exp().sum());
}

struct SinkhornResult {
  Eigen::MatrixXd pi;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Alternating log-domain updates on the dual potentials f, g:
//   f_i = eps log mu_i - eps lse_j((g_j - C_ij)/eps)
//   g_j = eps log nu_j - eps lse_i((f_i - C_ij)/eps)
// The plan pi_ij = exp((f_i + g_j - C_ij)/eps) is materialized each sweep to
// check the marginal residual. Potentials can be warm-started by the caller.
SinkhornResult sinkhorn_core(const Eigen::MatrixXd& cost, const Marginals& marg,
                             const OTConfig& cfg, Eigen::VectorXd& f, Eigen::VectorXd& g) {
  const Eigen::Index n = cost.rows();
  const Eigen::Index s = cost.cols();
  const double eps = cfg.epsilon;

  Eigen::ArrayXd log_mu = marg.mu.array().log();
  Eigen::ArrayXd log_nu = marg.nu.array().log();

  SinkhornResult res;
  res.pi.resize(n, s);
  Eigen::ArrayXd row_buf(s), col_buf(n);

  for (int it = 1; it <= cfg.sinkhorn_max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      row_buf = (g.array() - cost.row(i).transpose().array()) / eps;
      f(i) = eps * log_mu(i) - eps * lse(row_buf);
    }
    for (Eigen::Index j = 0; j < s; ++j) {
      col_buf = (f.array() - cost.col(j).array()) / eps;
      g(j) = eps * log_nu(j) - eps * lse(col_buf);
    }

    const Eigen::MatrixXd logits = (((-cost).colwise() + f).rowwise() + g.transpose()) / eps;
    res.pi = logits.array().exp().matrix();

    const double row_res = (res.pi.rowwise().sum() - marg.mu).cwiseAbs().maxCoeff();
    const double col_res = (res.pi.colwise().sum().transpose() - marg.nu).cwiseAbs().maxCoeff();
    res.residual = std::max(row_res, col_res);
    res.iterations = it;
    if (res.residual < cfg.sinkhorn_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

void check_inputs(const Eigen::MatrixXd& cost, const Marginals& marg) {
  if (marg.mu.size() == 0 || marg.nu.size() == 0) throw std::invalid_argument("empty marginal");
  if (cost.rows() != marg.mu.size() || cost.cols() != marg.nu.size())
    throw std::invalid_argument("cost shape does not match marginals");
  if (!cost.allFinite()) throw std::invalid_argument("non-finite cost entry");
}

void check_binary(const SparseMat& a) {
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a, k); it; ++it)
      if (it.value() != 0.0 && it.value() != 1.0)
        throw std::invalid_argument("structure matrix A is not binary");
}

using LinearizedCostFn = Eigen::MatrixXd (*)(const Eigen::MatrixXd& attr, const SparseMat& a,
                                             const Eigen::MatrixXd& b, const Eigen::MatrixXd& pi,
                                             double alpha);

// Shared outer loop of the GW/FGW solvers: iterate Sinkhorn on the local
// linearization until the plan stops moving. Potentials carry across outer
// iterations, which changes nothing at the fixed point but converges faster.
Coupling linearized_ot(const Eigen::MatrixXd& attr, const SparseMat& a, const Eigen::MatrixXd& b,
                       const Marginals& marg, const OTConfig& cfg, double alpha,
                       LinearizedCostFn cost_fn) {
  check_binary(a);
  if (a.rows() != marg.mu.size() || b.rows() != marg.nu.size() || b.rows() != b.cols())
    throw std::invalid_argument("structure matrix shapes do not match marginals");

  Coupling c;
  c.marginals = marg;
  c.pi = marg.mu * marg.nu.transpose();

  Eigen::VectorXd f = Eigen::VectorXd::Zero(marg.mu.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(marg.nu.size());

  // The relaxation factor backs off whenever the plan change stops
  // shrinking, which settles limit cycles of the underlying map.
  double gamma = cfg.outer_damping;
  const double gamma_floor = cfg.outer_damping / 64.0;
  double prev_delta = std::numeric_limits<double>::infinity();

  for (int t = 1; t <= cfg.outer_max_iter; ++t) {
    const Eigen::MatrixXd cost = cost_fn(attr, a, b, c.pi, alpha);
    check_inputs(cost, marg);
    SinkhornResult inner = sinkhorn_core(cost, marg, cfg, f, g);

    Eigen::MatrixXd next = (1.0 - gamma) * c.pi + gamma * inner.pi;
    c.outer_delta = (next - c.pi).cwiseAbs().maxCoeff();
    c.pi = std::move(next);
    const double row_res = (c.pi.rowwise().sum() - marg.mu).cwiseAbs().maxCoeff();
    const double col_res = (c.pi.colwise().sum().transpose() - marg.nu).cwiseAbs().maxCoeff();
    c.marginal_residual = std::max(row_res, col_res);
    c.sinkhorn_converged = inner.converged;
    c.sinkhorn_iterations = inner.iterations;
    c.outer_iterations = t;
    if (c.outer_delta < cfg.outer_tol) {
      c.outer_converged = true;
      return c;
    }
    if (c.outer_delta >= prev_delta && gamma > gamma_floor) gamma *= 0.5;
    prev_delta = c.outer_delta;
  }
  c.outer_converged = false;
  return c;
}

Eigen::MatrixXd gw_step_cost(const Eigen::MatrixXd&, const SparseMat& a, const Eigen::MatrixXd& b,
                             const Eigen::MatrixXd& pi, double) {
  return 2.0 * gw_linearized_cost(a, b, pi);
}

Eigen::MatrixXd fgw_step_cost(const Eigen::MatrixXd& attr, const SparseMat& a,
                              const Eigen::MatrixXd& b, const Eigen::MatrixXd& pi, double alpha) {
  return (1.0 - alpha) * attr + (2.0 * alpha) * gw_linearized_cost(a, b, pi);
}

}  // namespace

Marginals Marginals::make(Eigen::VectorXd mu, Eigen::VectorXd nu) {
  if (mu.size() == 0 || nu.size() == 0) throw std::invalid_argument("empty marginal");
  if ((mu.array() < 0.0).any() || (nu.array() < 0.0).any())
    throw std::invalid_argument("negative marginal entry");
  const double mu_sum = mu.sum();
  if (mu_sum <= 0.0) throw std::invalid_argument("node marginal sums to zero");
  mu /= mu_sum;
  nu = nu.cwiseMax(kNuFloor);
  nu /= nu.sum();
  Marginals m;
  m.mu = std::move(mu);
  m.nu = std::move(nu);
  return m;
}

Marginals Marginals::uniform(int n, int s) {
  return make(Eigen::VectorXd::Constant(n, 1.0 / n), Eigen::VectorXd::Constant(s, 1.0 / s));
}

void OTConfig::validate() const {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
  if (sinkhorn_tol <= 0.0 || outer_tol <= 0.0) throw std::invalid_argument("tolerances must be > 0");
  if (sinkhorn_max_iter < 1 || outer_max_iter < 1)
    throw std::invalid_argument("iteration caps must be >= 1");
  if (outer_damping <= 0.0 || outer_damping > 1.0)
    throw std::invalid_argument("outer_damping must be in (0, 1]");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0, 1]");
}

Coupling sinkhorn(const Eigen::MatrixXd& cost, const Marginals& marg, const OTConfig& cfg) {
  cfg.validate();
  check_inputs(cost, marg);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(marg.mu.size());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(marg.nu.size());
  SinkhornResult inner = sinkhorn_core(cost, marg, cfg, f, g);
  Coupling c;
  c.pi = std::move(inner.pi);
  c.marginals = marg;
  c.marginal_residual = inner.residual;
  c.sinkhorn_converged = inner.converged;
  c.sinkhorn_iterations = inner.iterations;
  return c;
}

Eigen::MatrixXd gw_linearized_cost(const SparseMat& a, const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& pi) {
  check_binary(a);
  const Eigen::VectorXd r = pi.rowwise().sum();       // N
  const Eigen::VectorXd col = pi.colwise().sum();     // S
  const Eigen::VectorXd ar = a * r;                   // N
  const Eigen::VectorXd bc = b * col;                 // S
  Eigen::MatrixXd g = -2.0 * (a * (pi * b.transpose()));
  g.colwise() += ar;
  g.rowwise() += bc.transpose();
  return g;
}

Coupling entropic_gw(const SparseMat& a, const Eigen::MatrixXd& b, const Marginals& marg,
                     const OTConfig& cfg) {
  cfg.validate();
  return linearized_ot(Eigen::MatrixXd(), a, b, marg, cfg, 1.0, gw_step_cost);
}

Coupling entropic_fgw(const Eigen::MatrixXd& attr_cost, const SparseMat& a,
                      const Eigen::MatrixXd& b, const Marginals& marg, const OTConfig& cfg) {
  cfg.validate();
  // Exact reductions at the endpoints; the attribute cost is constant in pi,
  // so alpha = 0 needs no outer loop at all.
  if (cfg.alpha == 0.0) return sinkhorn(attr_cost, marg, cfg);
  if (cfg.alpha == 1.0) return entropic_gw(a, b, marg, cfg);
  check_inputs(attr_cost, marg);
  return linearized_ot(attr_cost, a, b, marg, cfg, cfg.alpha, fgw_step_cost);
}

Assignment coupling_to_assignment(const Coupling& c) {
  Assignment out;
  out.q = c.pi;
  for (Eigen::Index i = 0; i < out.q.rows(); ++i) {
    const double rs = out.q.row(i).sum();
    if (!(rs > 0.0))
      throw std::runtime_error("zero coupling row " + std::to_string(i) +
                               "; the coupling is degenerate, raise epsilon");
    out.q.row(i) /= rs;
  }
  return out;
}

double coupling_entropy(const Eigen::MatrixXd& pi) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < pi.cols(); ++j)
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
      const double p = pi(i, j);
      if (p > 0.0) h -= p * std::log(p);
    }
  return h;
}

double gw_objective(const SparseMat& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& pi) {
  return gw_linearized_cost(a, b, pi).cwiseProduct(pi).sum();
}

double fgw_objective(const Eigen::MatrixXd& attr_cost, const SparseMat& a,
                     const Eigen::MatrixXd& b, const Eigen::MatrixXd& pi, double alpha) {
  return (1.0 - alpha) * attr_cost.cwiseProduct(pi).sum() + alpha * gw_objective(a, b, pi);
}

}  // namespace fgwc
