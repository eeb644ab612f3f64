#pragma once

#include <Eigen/Dense>

#include "fgwc/graph.hpp"
#include "fgwc/rng.hpp"

namespace fgwc {

struct ModelDims {
  int d0 = 0;    // input feature width
  int d1 = 256;  // GCN output width
  int d_h = 256; // projector hidden width
  int d = 64;    // embedding width
  int s = 0;     // prototype count
};

// One GCN layer, two-layer MLP projector, and the learnable prototype matrix.
struct ModelParams {
  Eigen::MatrixXd gcn_weight;    // d0 x d1
  Eigen::VectorXd gcn_bias;      // d1
  Eigen::MatrixXd proj_weight1;  // d1 x d_h
  Eigen::VectorXd proj_bias1;    // d_h
  Eigen::MatrixXd proj_weight2;  // d_h x d
  Eigen::VectorXd proj_bias2;    // d
  Eigen::MatrixXd prototypes;    // S x d

  // Kaiming-uniform weights and prototypes, zero biases.
  static ModelParams init(const ModelDims& dims, Rng& rng);
  ModelDims dims() const;
};

// Gradient (or moment) buffers mirroring every ModelParams tensor.
struct ModelGradients {
  Eigen::MatrixXd gcn_weight;
  Eigen::VectorXd gcn_bias;
  Eigen::MatrixXd proj_weight1;
  Eigen::VectorXd proj_bias1;
  Eigen::MatrixXd proj_weight2;
  Eigen::VectorXd proj_bias2;
  Eigen::MatrixXd prototypes;

  static ModelGradients zeros(const ModelDims& dims);
};

// Activations of one forward pass, consumed exactly once by backward.
struct GradientTape {
  Eigen::MatrixXd ax;        // A_hat * X
  Eigen::MatrixXd gcn_pre;   // ax * W_g + b_g
  Eigen::MatrixXd h;         // relu(gcn_pre)
  Eigen::MatrixXd proj_pre;  // h * W_1 + b_1
  Eigen::MatrixXd h1;        // relu(proj_pre)
  Eigen::MatrixXd z_raw;     // h1 * W_2 + b_2
  Eigen::MatrixXd z;         // row-L2-normalized z_raw (zero rows stay zero)
  bool consumed = false;
};

// Z = normalize_rows(relu(relu(A_hat X W_g + b_g) W_1 + b_1) W_2 + b_2).
Eigen::MatrixXd forward(const NormalizedAdjacency& adj_norm, const Eigen::MatrixXd& x,
                        const ModelParams& params, GradientTape& tape);

// Cosine similarity of unit-norm embeddings against row-normalized prototypes.
Eigen::MatrixXd compute_R(const Eigen::MatrixXd& z, const Eigen::MatrixXd& prototypes);

// Row softmax of R / tau, log-sum-exp stabilized.
Eigen::MatrixXd softmax_P(const Eigen::MatrixXd& r, double tau);

// L = -(1/2N) sum_n sum_s (Q1 log P2 + Q2 log P1); Q constant (stop-gradient).
double swapped_loss(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2,
                    const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2);

// Propagates dL/dZ through one view's tape, accumulating network gradients.
void backward(GradientTape& tape, const Eigen::MatrixXd& dz, const ModelParams& params,
              ModelGradients& grads);

// Full reverse pass of the swapped loss across both views, including the
// prototype gradient through the cosine head. Consumes both tapes.
ModelGradients swapped_loss_backward(GradientTape& tape1, GradientTape& tape2,
                                     const ModelParams& params, const Eigen::MatrixXd& q1,
                                     const Eigen::MatrixXd& q2, const Eigen::MatrixXd& p1,
                                     const Eigen::MatrixXd& p2, double tau);

struct AdamConfig {
  double lr = 5e-4;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  ModelGradients m;  // first moments
  ModelGradients v;  // second moments
  long step = 0;
  AdamConfig cfg;

  static OptimizerState init(const ModelDims& dims, const AdamConfig& cfg);
};

// Classic Adam; weight decay enters as an L2 term folded into the gradient.
void adam_step(ModelParams& params, const ModelGradients& grads, OptimizerState& state);

// Uniform on [-sqrt(6/fan_in), sqrt(6/fan_in)), variance 2/fan_in.
Eigen::MatrixXd kaiming_init(int rows, int cols, int fan_in, Rng& rng);

}  // namespace fgwc
