#pragma once

#include <Eigen/Dense>

#include "fgwc/graph.hpp"

namespace fgwc {

// Node/prototype marginal pair. nu is floored at 1e-6 and renormalized at
// construction so Sinkhorn always sees a strictly positive column marginal.
struct Marginals {
  Eigen::VectorXd mu;
  Eigen::VectorXd nu;

  static Marginals make(Eigen::VectorXd mu, Eigen::VectorXd nu);
  static Marginals uniform(int n, int s);
};

struct OTConfig {
  double epsilon = 0.05;
  int sinkhorn_max_iter = 500;
  double sinkhorn_tol = 1e-9;
  int outer_max_iter = 50;
  double outer_tol = 1e-7;
  // Relaxation of the outer plan update, pi <- (1-g)*pi + g*sinkhorn(L(pi)).
  // The plain fixed-point iteration (g = 1) can 2-cycle on fused instances;
  // averaging keeps the same fixed points and restores convergence.
  double outer_damping = 0.5;
  double alpha = 0.5;  // FGW trade-off, [0, 1]

  void validate() const;
};

struct Coupling {
  Eigen::MatrixXd pi;
  Marginals marginals;
  double marginal_residual = 0.0;  // achieved max-norm deviation
  bool sinkhorn_converged = false;
  int sinkhorn_iterations = 0;     // of the last inner solve
  double outer_delta = 0.0;        // inf-norm plan change of the last outer step
  bool outer_converged = true;
  int outer_iterations = 0;
};

// Row-stochastic soft assignment, Q[n] on the probability simplex.
struct Assignment {
  Eigen::MatrixXd q;
};

// Entropic OT: argmin_{pi in Pi(mu,nu)} <cost, pi> - eps*H(pi), solved by
// log-domain Sinkhorn with alternating potential updates.
Coupling sinkhorn(const Eigen::MatrixXd& cost, const Marginals& marg, const OTConfig& cfg);

// Linearized GW gradient direction for binary A and B in [0,1]:
//   G[i,j] = sum_{k,l} |A[i,k] - B[j,l]| pi[k,l]
// computed exactly through |a-b| = a + b - 2ab for a in {0,1}.
Eigen::MatrixXd gw_linearized_cost(const SparseMat& a, const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& pi);

// Entropic Gromov-Wasserstein between structure matrices, iterated
// linearization around pi^0 = mu nu^T with the Sinkhorn kernel inside.
Coupling entropic_gw(const SparseMat& a, const Eigen::MatrixXd& b, const Marginals& marg,
                     const OTConfig& cfg);

// Entropic fused GW: per-iteration cost (1-alpha)*attr + 2*alpha*G(pi).
// alpha = 0 reduces exactly to sinkhorn(attr_cost), alpha = 1 to entropic_gw.
Coupling entropic_fgw(const Eigen::MatrixXd& attr_cost, const SparseMat& a,
                      const Eigen::MatrixXd& b, const Marginals& marg, const OTConfig& cfg);

// Q[n,s] = pi[n,s] / sum_s' pi[n,s']. Throws on a zero row.
Assignment coupling_to_assignment(const Coupling& c);

// -sum pi log pi, with 0 log 0 = 0.
double coupling_entropy(const Eigen::MatrixXd& pi);

// <G(pi), pi>, the exact quadratic GW objective at pi.
double gw_objective(const SparseMat& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& pi);

// (1-alpha)<attr, pi> + alpha <G(pi), pi>, unregularized.
double fgw_objective(const Eigen::MatrixXd& attr_cost, const SparseMat& a,
                     const Eigen::MatrixXd& b, const Eigen::MatrixXd& pi, double alpha);

}  // namespace fgwc
