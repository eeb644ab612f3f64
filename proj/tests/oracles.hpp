// Independent reference implementations used only by tests. Everything here
// is computed straight from definitions with plain loops, deliberately
// sharing no code with the library paths it checks.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

// G[i,j] = sum_{k,l} |A[i,k] - B[j,l]| pi[k,l], by the quadruple loop.
inline Eigen::MatrixXd gw_cost_brute(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const Eigen::MatrixXd& pi) {
  const Eigen::Index n = a.rows(), s = b.rows();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, s);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < s; ++l)
          g(i, j) += std::abs(a(i, k) - b(j, l)) * pi(k, l);
  return g;
}

// Exact quadratic GW objective sum_{ijkl} |A_ik - B_jl| pi_ij pi_kl.
inline double gw_objective_brute(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const Eigen::MatrixXd& pi) {
  double obj = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      for (Eigen::Index k = 0; k < a.rows(); ++k)
        for (Eigen::Index l = 0; l < b.rows(); ++l)
          obj += std::abs(a(i, k) - b(j, l)) * pi(i, j) * pi(k, l);
  return obj;
}

inline double fgw_objective_brute(const Eigen::MatrixXd& attr, const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b, const Eigen::MatrixXd& pi,
                                  double alpha) {
  double lin = 0.0;
  for (Eigen::Index i = 0; i < pi.rows(); ++i)
    for (Eigen::Index j = 0; j < pi.cols(); ++j) lin += attr(i, j) * pi(i, j);
  return (1.0 - alpha) * lin + alpha * gw_objective_brute(a, b, pi);
}

// Minimum GW objective over all n! permutation couplings (uniform marginals).
inline double gw_permutation_min(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double obj = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) obj += std::abs(a(i, k) - b(perm[i], perm[k]));
    best = std::min(best, obj / (static_cast<double>(n) * n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Minimum unregularized FGW objective over couplings on a simplex grid:
// every entry a multiple of `step`, row sums mu, column sums nu (both must
// be grid-representable). Only shapes small enough for full enumeration.
inline double fgw_grid_min(const Eigen::MatrixXd& attr, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b, const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& nu, double alpha, double step) {
  const int n = static_cast<int>(mu.size());
  const int s = static_cast<int>(nu.size());
  std::vector<int> row_units(n), col_units(s);
  for (int i = 0; i < n; ++i) row_units[i] = static_cast<int>(std::lround(mu(i) / step));
  for (int j = 0; j < s; ++j) col_units[j] = static_cast<int>(std::lround(nu(j) / step));

  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd pi(n, s);
  std::vector<int> col_left(col_units);
  std::function<void(int)> rec = [&](int row) {
    if (row == n) {
      for (int j = 0; j < s; ++j)
        if (col_left[j] != 0) return;
      best = std::min(best, fgw_objective_brute(attr, a, b, pi, alpha));
      return;
    }
    // Distribute row_units[row] across s columns.
    std::vector<int> alloc(s, 0);
    std::function<void(int, int)> fill = [&](int col, int left) {
      if (col == s - 1) {
        if (left > col_left[col]) return;
        alloc[col] = left;
        for (int j = 0; j < s; ++j) {
          pi(row, j) = alloc[j] * step;
          col_left[j] -= alloc[j];
        }
        rec(row + 1);
        for (int j = 0; j < s; ++j) col_left[j] += alloc[j];
        return;
      }
      for (int take = 0; take <= std::min(left, col_left[col]); ++take) {
        alloc[col] = take;
        fill(col + 1, left - take);
      }
    };
    fill(0, row_units[row]);
  };
  rec(0);
  return best;
}

// Cross-entropy loss evaluated entry by entry.
inline double swapped_loss_brute(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2,
                                 const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q1.rows(); ++i)
    for (Eigen::Index j = 0; j < q1.cols(); ++j)
      acc += q1(i, j) * std::log(p2(i, j)) + q2(i, j) * std::log(p1(i, j));
  return -acc / (2.0 * static_cast<double>(q1.rows()));
}

// Best label permutation by exhaustive search; returns (max matches, sigma,
// unique flag). Lexicographically first optimum wins.
struct LsaBrute {
  long long best = -1;
  std::vector<int> sigma;
  bool unique = true;
};

inline LsaBrute lsa_brute(const std::vector<int>& pred, const std::vector<int>& truth, int c) {
  std::vector<std::vector<long long>> m(c, std::vector<long long>(c, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++m[pred[i]][truth[i]];
  std::vector<int> perm(c);
  std::iota(perm.begin(), perm.end(), 0);
  LsaBrute out;
  do {
    long long score = 0;
    for (int i = 0; i < c; ++i) score += m[i][perm[i]];
    if (score > out.best) {
      out.best = score;
      out.sigma = perm;
      out.unique = true;
    } else if (score == out.best) {
      out.unique = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

struct MetricsBrute {
  double acc, macro_f1, nmi, ari;
};

// Direct-formula clustering metrics: LSA by exhaustive permutations (use
// only with small class counts), Macro-F1 on mapped labels with zero
// division -> 0, NMI with arithmetic-mean entropy normalization, ARI by
// pair counting. Degenerate zero normalizers map to 1.
inline MetricsBrute metrics_brute(const std::vector<int>& pred, const std::vector<int>& truth,
                                  int c) {
  const double n = static_cast<double>(pred.size());
  MetricsBrute out{};

  const LsaBrute lsa = lsa_brute(pred, truth, c);
  out.acc = static_cast<double>(lsa.best) / n;

  std::vector<int> mapped(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) mapped[i] = lsa.sigma[pred[i]];
  double f1_sum = 0.0;
  for (int k = 0; k < c; ++k) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (mapped[i] == k && truth[i] == k) ++tp;
      if (mapped[i] == k && truth[i] != k) ++fp;
      if (mapped[i] != k && truth[i] == k) ++fn;
    }
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    f1_sum += (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  out.macro_f1 = f1_sum / c;

  std::vector<std::vector<long long>> joint(c, std::vector<long long>(c, 0));
  std::vector<long long> ca(c, 0), cb(c, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++joint[pred[i]][truth[i]];
    ++ca[pred[i]];
    ++cb[truth[i]];
  }
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      if (joint[i][j] > 0)
        mi += (joint[i][j] / n) * std::log(joint[i][j] * n / ((double)ca[i] * (double)cb[j]));
  for (int i = 0; i < c; ++i) {
    if (ca[i] > 0) ha -= (ca[i] / n) * std::log(ca[i] / n);
    if (cb[i] > 0) hb -= (cb[i] / n) * std::log(cb[i] / n);
  }
  out.nmi = (ha + hb) > 0 ? mi / (0.5 * (ha + hb)) : 1.0;

  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sij = 0, sa = 0, sb = 0;
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) sij += c2((double)joint[i][j]);
  for (int i = 0; i < c; ++i) {
    sa += c2((double)ca[i]);
    sb += c2((double)cb[i]);
  }
  const double expected = sa * sb / c2(n);
  const double denom = 0.5 * (sa + sb) - expected;
  out.ari = denom != 0.0 ? (sij - expected) / denom : 1.0;
  return out;
}

}  // namespace oracle
