#include "fgwc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace fgwc {

namespace {

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

// Backward of row-L2 normalization: d_orig = (d_hat - (d_hat . hat) hat) / |orig|.
Eigen::MatrixXd normalize_rows_backward(const Eigen::MatrixXd& orig,
                                        const Eigen::MatrixXd& d_normed) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(orig.rows(), orig.cols());
  for (Eigen::Index i = 0; i < orig.rows(); ++i) {
    const double n = orig.row(i).norm();
    if (n == 0.0) continue;
    const Eigen::RowVectorXd hat = orig.row(i) / n;
    out.row(i) = (d_normed.row(i) - d_normed.row(i).dot(hat) * hat) / n;
  }
  return out;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& d) {
  return (pre.array() > 0.0).select(d, Eigen::MatrixXd::Zero(d.rows(), d.cols()));
}

}  // namespace

ModelParams ModelParams::init(const ModelDims& dims, Rng& rng) {
  ModelParams p;
  p.gcn_weight = kaiming_init(dims.d0, dims.d1, dims.d0, rng);
  p.gcn_bias = Eigen::VectorXd::Zero(dims.d1);
  p.proj_weight1 = kaiming_init(dims.d1, dims.d_h, dims.d1, rng);
  p.proj_bias1 = Eigen::VectorXd::Zero(dims.d_h);
  p.proj_weight2 = kaiming_init(dims.d_h, dims.d, dims.d_h, rng);
  p.proj_bias2 = Eigen::VectorXd::Zero(dims.d);
  p.prototypes = kaiming_init(dims.s, dims.d, dims.d, rng);
  return p;
}

ModelDims ModelParams::dims() const {
  ModelDims d;
  d.d0 = static_cast<int>(gcn_weight.rows());
  d.d1 = static_cast<int>(gcn_weight.cols());
  d.d_h = static_cast<int>(proj_weight1.cols());
  d.d = static_cast<int>(proj_weight2.cols());
  d.s = static_cast<int>(prototypes.rows());
  return d;
}

ModelGradients ModelGradients::zeros(const ModelDims& dims) {
  ModelGradients g;
  g.gcn_weight = Eigen::MatrixXd::Zero(dims.d0, dims.d1);
  g.gcn_bias = Eigen::VectorXd::Zero(dims.d1);
  g.proj_weight1 = Eigen::MatrixXd::Zero(dims.d1, dims.d_h);
  g.proj_bias1 = Eigen::VectorXd::Zero(dims.d_h);
  g.proj_weight2 = Eigen::MatrixXd::Zero(dims.d_h, dims.d);
  g.proj_bias2 = Eigen::VectorXd::Zero(dims.d);
  g.prototypes = Eigen::MatrixXd::Zero(dims.s, dims.d);
  return g;
}

Eigen::MatrixXd forward(const NormalizedAdjacency& adj_norm, const Eigen::MatrixXd& x,
                        const ModelParams& params, GradientTape& tape) {
  if (x.cols() != params.gcn_weight.rows())
    throw std::invalid_argument("feature width does not match gcn_weight");
  if (adj_norm.matrix.rows() != x.rows())
    throw std::invalid_argument("adjacency and feature row counts differ");

  tape.ax = adj_norm.matrix * x;
  tape.gcn_pre = (tape.ax * params.gcn_weight).rowwise() + params.gcn_bias.transpose();
  tape.h = relu(tape.gcn_pre);
  tape.proj_pre = (tape.h * params.proj_weight1).rowwise() + params.proj_bias1.transpose();
  tape.h1 = relu(tape.proj_pre);
  tape.z_raw = (tape.h1 * params.proj_weight2).rowwise() + params.proj_bias2.transpose();
  tape.z = normalize_rows(tape.z_raw);
  tape.consumed = false;
  return tape.z;
}

Eigen::MatrixXd compute_R(const Eigen::MatrixXd& z, const Eigen::MatrixXd& prototypes) {
  return z * normalize_rows(prototypes).transpose();
}

Eigen::MatrixXd softmax_P(const Eigen::MatrixXd& r, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
  Eigen::MatrixXd p(r.rows(), r.cols());
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    const Eigen::ArrayXd x = r.row(i).transpose().array() / tau;
    const Eigen::ArrayXd e = (x - x.maxCoeff()).exp();
    p.row(i) = (e / e.sum()).transpose();
  }
  return p;
}

double swapped_loss(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2,
                    const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2) {
  const double n = static_cast<double>(q1.rows());
  const double ce12 = (q1.array() * p2.array().log()).sum();
  const double ce21 = (q2.array() * p1.array().log()).sum();
  return -(ce12 + ce21) / (2.0 * n);
}

void backward(GradientTape& tape, const Eigen::MatrixXd& dz, const ModelParams& params,
              ModelGradients& grads) {
  if (tape.consumed) throw std::logic_error("gradient tape already consumed");
  tape.consumed = true;

  const Eigen::MatrixXd dz_raw = normalize_rows_backward(tape.z_raw, dz);

  grads.proj_weight2 += tape.h1.transpose() * dz_raw;
  grads.proj_bias2 += dz_raw.colwise().sum().transpose();
  const Eigen::MatrixXd dh1 = dz_raw * params.proj_weight2.transpose();

  const Eigen::MatrixXd dm1 = relu_mask(tape.proj_pre, dh1);
  grads.proj_weight1 += tape.h.transpose() * dm1;
  grads.proj_bias1 += dm1.colwise().sum().transpose();
  const Eigen::MatrixXd dh = dm1 * params.proj_weight1.transpose();

  const Eigen::MatrixXd dmg = relu_mask(tape.gcn_pre, dh);
  grads.gcn_weight += tape.ax.transpose() * dmg;
  grads.gcn_bias += dmg.colwise().sum().transpose();
}

ModelGradients swapped_loss_backward(GradientTape& tape1, GradientTape& tape2,
                                     const ModelParams& params, const Eigen::MatrixXd& q1,
                                     const Eigen::MatrixXd& q2, const Eigen::MatrixXd& p1,
                                     const Eigen::MatrixXd& p2, double tau) {
  const double n = static_cast<double>(q1.rows());
  ModelGradients grads = ModelGradients::zeros(params.dims());

  // dL/dP, then through the row softmax at temperature tau:
  //   dR = (dP - (dP . P per row) 1^T) o P / tau
  const auto softmax_back = [tau](const Eigen::MatrixXd& p, const Eigen::MatrixXd& dp) {
    Eigen::MatrixXd dr(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double dot = dp.row(i).dot(p.row(i));
      dr.row(i) = (dp.row(i).array() - dot) * p.row(i).array() / tau;
    }
    return dr;
  };
  const Eigen::MatrixXd dp1 = -(q2.array() / p1.array()).matrix() / (2.0 * n);
  const Eigen::MatrixXd dp2 = -(q1.array() / p2.array()).matrix() / (2.0 * n);
  const Eigen::MatrixXd dr1 = softmax_back(p1, dp1);
  const Eigen::MatrixXd dr2 = softmax_back(p2, dp2);

  // R = Z * normalize_rows(S)^T
  const Eigen::MatrixXd s_hat = normalize_rows(params.prototypes);
  const Eigen::MatrixXd dz1 = dr1 * s_hat;
  const Eigen::MatrixXd dz2 = dr2 * s_hat;
  const Eigen::MatrixXd ds_hat = dr1.transpose() * tape1.z + dr2.transpose() * tape2.z;
  grads.prototypes += normalize_rows_backward(params.prototypes, ds_hat);

  backward(tape1, dz1, params, grads);
  backward(tape2, dz2, params, grads);
  return grads;
}

OptimizerState OptimizerState::init(const ModelDims& dims, const AdamConfig& cfg) {
  OptimizerState s;
  s.m = ModelGradients::zeros(dims);
  s.v = ModelGradients::zeros(dims);
  s.step = 0;
  s.cfg = cfg;
  return s;
}

namespace {

template <typename T>
void adam_update(T& theta, const T& grad, T& m, T& v, const AdamConfig& c, double bc1, double bc2) {
  const T g = grad + c.weight_decay * theta;
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
  const T m_hat = m / bc1;
  const T v_hat = v / bc2;
  theta -= c.lr * (m_hat.array() / (v_hat.array().sqrt() + c.eps)).matrix();
}

}  // namespace

void adam_step(ModelParams& params, const ModelGradients& grads, OptimizerState& state) {
  state.step += 1;
  const AdamConfig& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  adam_update(params.gcn_weight, grads.gcn_weight, state.m.gcn_weight, state.v.gcn_weight, c, bc1, bc2);
  adam_update(params.gcn_bias, grads.gcn_bias, state.m.gcn_bias, state.v.gcn_bias, c, bc1, bc2);
  adam_update(params.proj_weight1, grads.proj_weight1, state.m.proj_weight1, state.v.proj_weight1, c, bc1, bc2);
  adam_update(params.proj_bias1, grads.proj_bias1, state.m.proj_bias1, state.v.proj_bias1, c, bc1, bc2);
  adam_update(params.proj_weight2, grads.proj_weight2, state.m.proj_weight2, state.v.proj_weight2, c, bc1, bc2);
  adam_update(params.proj_bias2, grads.proj_bias2, state.m.proj_bias2, state.v.proj_bias2, c, bc1, bc2);
  adam_update(params.prototypes, grads.prototypes, state.m.prototypes, state.v.prototypes, c, bc1, bc2);
}

Eigen::MatrixXd kaiming_init(int rows, int cols, int fan_in, Rng& rng) {
  if (fan_in < 1) throw std::invalid_argument("fan_in must be >= 1");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * bound;
  return m;
}

}  // namespace fgwc
