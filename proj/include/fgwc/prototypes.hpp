#pragma once

#include <Eigen/Dense>

namespace fgwc {

// Momentum-tracked prototype graph B (S x S, symmetric, entries in [0,1])
// and prototype marginal nu (simplex). B starts at identity, nu uniform.
struct PrototypeState {
  Eigen::MatrixXd b;
  Eigen::VectorXd nu;
  double beta1 = 0.99;
  double beta2 = 0.999;
};

struct ViewPrototypes {
  Eigen::MatrixXd b1;
  Eigen::VectorXd nu1;
  Eigen::MatrixXd b2;
  Eigen::VectorXd nu2;
};

PrototypeState init_state(int s, double beta1, double beta2);

// B <- beta1 * B + (1 - beta1) * P^T P / max(P^T P). The max-normalization
// keeps the blend on the same [0,1] scale as the binary data adjacency.
Eigen::MatrixXd update_B(const PrototypeState& state, const Eigen::MatrixXd& p);

// nu <- beta2 * nu + (1 - beta2) * P^T 1 / N, renormalized to sum exactly 1.
Eigen::VectorXd update_nu(const PrototypeState& state, const Eigen::MatrixXd& p);

// Interleaved two-view update: view 1 blends against the incoming state and
// commits, then view 2 blends against view 1's output and commits. Returns
// the per-view (B, nu) pairs; state ends at view 2's values.
ViewPrototypes step_views(PrototypeState& state, const Eigen::MatrixXd& p1,
                          const Eigen::MatrixXd& p2);

}  // namespace fgwc
