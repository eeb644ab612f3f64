#include <doctest.h>

#include <cmath>

#include "fgwc/ot.hpp"
#include "fgwc/rng.hpp"
#include "oracles.hpp"

using namespace fgwc;

namespace {

OTConfig tight_cfg(double eps) {
  OTConfig cfg;
  cfg.epsilon = eps;
  cfg.sinkhorn_max_iter = 5000;
  cfg.sinkhorn_tol = 1e-10;
  cfg.outer_max_iter = 200;
  cfg.outer_tol = 1e-10;
  return cfg;
}

SparseMat random_binary_graph(int n, double p, Rng& rng) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) {
        trips.emplace_back(i, j, 1.0);
        trips.emplace_back(j, i, 1.0);
      }
  SparseMat a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

Eigen::MatrixXd random_stochastic(int n, int s, Rng& rng) {
  Eigen::MatrixXd m(n, s);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < s; ++j) {
      m(i, j) = rng.uniform() + 1e-3;
      sum += m(i, j);
    }
    m.row(i) /= sum;
  }
  return m;
}

SparseMat path_graph(int n) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i + 1 < n; ++i) {
    trips.emplace_back(i, i + 1, 1.0);
    trips.emplace_back(i + 1, i, 1.0);
  }
  SparseMat a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

}  // namespace

TEST_SUITE("ot") {

TEST_CASE("marginals: nu floored and renormalized") {
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  Eigen::VectorXd nu(2);
  nu << 1.0, 0.0;
  const Marginals m = Marginals::make(mu, nu);
  CHECK(m.nu.minCoeff() > 0.0);
  CHECK(m.nu.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(Marginals::make(Eigen::VectorXd(), nu), std::invalid_argument);
  CHECK_THROWS_AS(Marginals::make(-mu, nu), std::invalid_argument);
}

TEST_CASE("sinkhorn: zero cost gives the outer product") {
  const Marginals m = Marginals::uniform(3, 4);
  const Coupling c = sinkhorn(Eigen::MatrixXd::Zero(3, 4), m, tight_cfg(0.1));
  CHECK(c.sinkhorn_converged);
  CHECK((c.pi - m.mu * m.nu.transpose()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("sinkhorn: 2x2 approaches the LP vertex as eps -> 0") {
  // LP oracle on the 2x2 Birkhoff polytope: vertices are the identity and
  // the swap coupling, with costs 0 and 1. The minimizer is the identity.
  Eigen::MatrixXd cost(2, 2);
  cost << 0.0, 1.0, 1.0, 0.0;
  const Eigen::MatrixXd vertex_id = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  Eigen::MatrixXd vertex_swap(2, 2);
  vertex_swap << 0.0, 0.5, 0.5, 0.0;
  const double cost_id = cost.cwiseProduct(vertex_id).sum();
  const double cost_swap = cost.cwiseProduct(vertex_swap).sum();
  const Eigen::MatrixXd lp_opt = cost_id <= cost_swap ? vertex_id : vertex_swap;

  const Coupling c = sinkhorn(cost, Marginals::uniform(2, 2), tight_cfg(0.01));
  CHECK((c.pi - lp_opt).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("sinkhorn: marginal residual contract and entropy") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + (int)rng.uniform_int(6);
    const int s = 2 + (int)rng.uniform_int(6);
    Eigen::MatrixXd cost(n, s);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < s; ++j) cost(i, j) = rng.uniform();
    const Marginals m = Marginals::uniform(n, s);
    const Coupling c = sinkhorn(cost, m, tight_cfg(0.05));
    CHECK(c.sinkhorn_converged);
    CHECK(c.marginal_residual < 1e-10);
    CHECK((c.pi.rowwise().sum() - m.mu).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((c.pi.colwise().sum().transpose() - m.nu).cwiseAbs().maxCoeff() < 1e-10);
    const double h = coupling_entropy(c.pi);
    CHECK(std::isfinite(h));
    CHECK(h > 0.0);
  }
}

TEST_CASE("sinkhorn: cost-shift invariance") {
  Rng rng(23);
  Eigen::MatrixXd cost(4, 3);
  for (int i = 0; i < 12; ++i) cost.data()[i] = rng.uniform();
  const Marginals m = Marginals::uniform(4, 3);
  const OTConfig cfg = tight_cfg(0.05);
  const Coupling base = sinkhorn(cost, m, cfg);
  const Coupling shifted = sinkhorn(cost.array() + 3.7, m, cfg);
  CHECK((base.pi - shifted.pi).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("sinkhorn: deterministic bit-for-bit") {
  Rng rng(29);
  Eigen::MatrixXd cost(5, 4);
  for (int i = 0; i < 20; ++i) cost.data()[i] = rng.uniform();
  const Marginals m = Marginals::uniform(5, 4);
  const Coupling a = sinkhorn(cost, m, tight_cfg(0.05));
  const Coupling b = sinkhorn(cost, m, tight_cfg(0.05));
  CHECK(a.pi == b.pi);
}

TEST_CASE("sinkhorn: rejects bad input") {
  const Marginals m = Marginals::uniform(2, 2);
  Eigen::MatrixXd cost(2, 2);
  cost << 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0;
  CHECK_THROWS_AS(sinkhorn(cost, m, tight_cfg(0.1)), std::invalid_argument);
}

TEST_CASE("gw_linearized_cost: zero coupling gives zero cost") {
  Rng rng(31);
  const SparseMat a = random_binary_graph(5, 0.5, rng);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd g = gw_linearized_cost(a, b, Eigen::MatrixXd::Zero(5, 3));
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gw_linearized_cost: matches the quadruple-loop oracle") {
  Rng rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + (int)rng.uniform_int(7);
    const int s = 2 + (int)rng.uniform_int(7);
    const SparseMat a = random_binary_graph(n, 0.5, rng);
    Eigen::MatrixXd b(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = i; j < s; ++j) b(i, j) = b(j, i) = rng.uniform();
    Eigen::MatrixXd pi(n, s);
    for (int i = 0; i < n * s; ++i) pi.data()[i] = rng.uniform();
    pi /= pi.sum();

    const Eigen::MatrixXd fast = gw_linearized_cost(a, b, pi);
    const Eigen::MatrixXd brute = oracle::gw_cost_brute(Eigen::MatrixXd(a), b, pi);
    CHECK((fast - brute).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gw_linearized_cost: identity structures, uniform coupling") {
  const int n = 4;
  const SparseMat a = sparse_identity(n);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd pi = Eigen::MatrixXd::Constant(n, n, 1.0 / (n * n));
  const Eigen::MatrixXd fast = gw_linearized_cost(a, b, pi);
  const Eigen::MatrixXd brute = oracle::gw_cost_brute(Eigen::MatrixXd(a), b, pi);
  CHECK((fast - brute).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gw_linearized_cost: rejects non-binary A") {
  SparseMat a(2, 2);
  a.insert(0, 1) = 0.5;
  a.insert(1, 0) = 0.5;
  CHECK_THROWS_AS(gw_linearized_cost(a, Eigen::MatrixXd::Identity(2, 2),
                                     Eigen::MatrixXd::Constant(2, 2, 0.25)),
                  std::invalid_argument);
}

TEST_CASE("entropic_gw: zero structures give the outer product") {
  const SparseMat a(4, 4);  // empty adjacency
  const Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
  const Marginals m = Marginals::uniform(4, 4);
  const Coupling c = entropic_gw(a, b, m, tight_cfg(0.05));
  CHECK((c.pi - m.mu * m.nu.transpose()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("entropic_gw: identity-vs-identity stays at the outer product") {
  const int n = 5;
  const Marginals m = Marginals::uniform(n, n);
  const Coupling c = entropic_gw(sparse_identity(n), Eigen::MatrixXd::Identity(n, n), m,
                                 tight_cfg(0.05));
  CHECK((c.pi - m.mu * m.nu.transpose()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("entropic_gw: isomorphic 3-paths reach the permutation minimum") {
  const SparseMat a = path_graph(3);
  // Relabeled path 1-0-2: same graph with nodes permuted.
  std::vector<Eigen::Triplet<double>> trips = {{1, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}, {2, 0, 1.0}};
  SparseMat b_sp(3, 3);
  b_sp.setFromTriplets(trips.begin(), trips.end());
  const Eigen::MatrixXd b(b_sp);

  const Marginals m = Marginals::uniform(3, 3);
  const Coupling c = entropic_gw(a, b, m, tight_cfg(0.005));
  const double perm_min = oracle::gw_permutation_min(Eigen::MatrixXd(a), b);
  CHECK(perm_min == doctest::Approx(0.0));
  CHECK(gw_objective(a, b, c.pi) <= perm_min + 1e-3);
}

TEST_CASE("entropic_gw: objective non-increasing up to entropic slack") {
  Rng rng(41);
  const int n = 6, s = 4;
  const SparseMat a = random_binary_graph(n, 0.5, rng);
  Eigen::MatrixXd b(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j) b(i, j) = b(j, i) = rng.uniform();
  const Marginals m = Marginals::uniform(n, s);

  // Trace the outer loop by replaying it one iteration at a time.
  OTConfig cfg = tight_cfg(0.02);
  const double slack = cfg.epsilon * std::log((double)n * s);
  double prev = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd pi = m.mu * m.nu.transpose();
  for (int t = 0; t < 15; ++t) {
    OTConfig one = cfg;
    one.outer_max_iter = t + 1;
    const Coupling c = entropic_gw(a, b, m, one);
    const double obj = gw_objective(a, b, c.pi);
    CHECK(obj <= prev + slack + 1e-9);
    prev = obj;
  }
}

TEST_CASE("entropic_fgw: alpha=0 equals sinkhorn bit-for-bit") {
  Rng rng(43);
  const int n = 5, s = 3;
  Eigen::MatrixXd attr(n, s);
  for (int i = 0; i < n * s; ++i) attr.data()[i] = rng.uniform() - 0.5;
  const SparseMat a = random_binary_graph(n, 0.5, rng);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(s, s);
  const Marginals m = Marginals::uniform(n, s);
  OTConfig cfg = tight_cfg(0.05);
  cfg.alpha = 0.0;
  const Coupling fused = entropic_fgw(attr, a, b, m, cfg);
  const Coupling plain = sinkhorn(attr, m, cfg);
  CHECK(fused.pi == plain.pi);
}

TEST_CASE("entropic_fgw: alpha=1 equals entropic_gw bit-for-bit") {
  Rng rng(47);
  const int n = 5, s = 3;
  Eigen::MatrixXd attr = Eigen::MatrixXd::Constant(n, s, 0.3);
  const SparseMat a = random_binary_graph(n, 0.5, rng);
  Eigen::MatrixXd b(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j) b(i, j) = b(j, i) = rng.uniform();
  const Marginals m = Marginals::uniform(n, s);
  OTConfig cfg = tight_cfg(0.05);
  cfg.alpha = 1.0;
  const Coupling fused = entropic_fgw(attr, a, b, m, cfg);
  const Coupling pure = entropic_gw(a, b, m, cfg);
  CHECK(fused.pi == pure.pi);
}

TEST_CASE("entropic_fgw: 4x2 grid oracle at alpha=0.5") {
  Rng rng(53);
  const int n = 4, s = 2;
  const SparseMat a = random_binary_graph(n, 0.6, rng);
  Eigen::MatrixXd b(s, s);
  b << 1.0, 0.3, 0.3, 1.0;
  Eigen::MatrixXd attr(n, s);
  for (int i = 0; i < n * s; ++i) attr.data()[i] = rng.uniform() - 0.5;
  const Marginals m = Marginals::uniform(n, s);

  const double grid_min =
      oracle::fgw_grid_min(attr, Eigen::MatrixXd(a), b, m.mu, m.nu, 0.5, 0.05);

  double best = std::numeric_limits<double>::infinity();
  for (double eps : {0.02, 0.005, 0.001, 0.0002}) {
    OTConfig cfg = tight_cfg(eps);
    cfg.sinkhorn_max_iter = 20000;
    cfg.alpha = 0.5;
    const Coupling c = entropic_fgw(attr, a, b, m, cfg);
    best = std::min(best, fgw_objective(attr, a, b, c.pi, 0.5));
  }
  CHECK(best <= grid_min + 1e-3);
}

TEST_CASE("coupling_to_assignment: row normalization arithmetic") {
  Coupling c;
  c.pi = Eigen::MatrixXd(2, 2);
  c.pi << 0.2, 0.3, 0.1, 0.4;
  const Assignment q = coupling_to_assignment(c);
  Eigen::MatrixXd want(2, 2);
  want << 0.4, 0.6, 0.2, 0.8;
  CHECK((q.q - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coupling_to_assignment: outer product rows equal nu") {
  const Marginals m = Marginals::uniform(5, 3);
  Coupling c;
  c.pi = m.mu * m.nu.transpose();
  const Assignment q = coupling_to_assignment(c);
  for (int i = 0; i < 5; ++i)
    CHECK((q.q.row(i).transpose() - m.nu).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coupling_to_assignment: zero row raises") {
  Coupling c;
  c.pi = Eigen::MatrixXd::Zero(2, 2);
  c.pi(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(coupling_to_assignment(c), doctest::Contains("zero coupling row"),
                       std::runtime_error);
}

TEST_CASE("coupling_to_assignment: sinkhorn output rows sum to one") {
  Rng rng(59);
  Eigen::MatrixXd cost(6, 4);
  for (int i = 0; i < 24; ++i) cost.data()[i] = rng.uniform();
  const Coupling c = sinkhorn(cost, Marginals::uniform(6, 4), tight_cfg(0.05));
  const Assignment q = coupling_to_assignment(c);
  CHECK((q.q.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
}

}  // TEST_SUITE
