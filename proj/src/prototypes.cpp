#include "fgwc/prototypes.hpp"

#include <stdexcept>

namespace fgwc {

PrototypeState init_state(int s, double beta1, double beta2) {
  if (s < 2) throw std::invalid_argument("prototype count must be >= 2");
  if (beta1 < 0.0 || beta1 > 1.0 || beta2 < 0.0 || beta2 > 1.0)
    throw std::invalid_argument("momentum weights must be in [0, 1]");
  PrototypeState st;
  st.b = Eigen::MatrixXd::Identity(s, s);
  st.nu = Eigen::VectorXd::Constant(s, 1.0 / s);
  st.beta1 = beta1;
  st.beta2 = beta2;
  return st;
}

Eigen::MatrixXd update_B(const PrototypeState& state, const Eigen::MatrixXd& p) {
  Eigen::MatrixXd ptp = p.transpose() * p;
  const double m = ptp.maxCoeff();
  if (m > 0.0) ptp /= m;
  Eigen::MatrixXd b = state.beta1 * state.b + (1.0 - state.beta1) * ptp;
  b = 0.5 * (b + b.transpose().eval());
  return b;
}

Eigen::VectorXd update_nu(const PrototypeState& state, const Eigen::MatrixXd& p) {
  const double n = static_cast<double>(p.rows());
  const Eigen::VectorXd mass = p.colwise().sum().transpose() / n;
  Eigen::VectorXd nu = state.beta2 * state.nu + (1.0 - state.beta2) * mass;
  nu /= nu.sum();
  return nu;
}

ViewPrototypes step_views(PrototypeState& state, const Eigen::MatrixXd& p1,
                          const Eigen::MatrixXd& p2) {
  ViewPrototypes out;
  out.b1 = update_B(state, p1);
  out.nu1 = update_nu(state, p1);
  state.b = out.b1;
  state.nu = out.nu1;
  out.b2 = update_B(state, p2);
  out.nu2 = update_nu(state, p2);
  state.b = out.b2;
  state.nu = out.nu2;
  return out;
}

}  // namespace fgwc
