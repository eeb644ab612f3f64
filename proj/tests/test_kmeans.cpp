#include <doctest.h>

#include "fgwc/kmeans.hpp"
#include "fgwc/rng.hpp"

using namespace fgwc;

TEST_SUITE("kmeans") {

TEST_CASE("two separated clouds split perfectly") {
  Rng rng(3);
  Eigen::MatrixXd x(40, 2);
  for (int i = 0; i < 20; ++i) x.row(i) << 10.0 + rng.normal() * 0.1, rng.normal() * 0.1;
  for (int i = 20; i < 40; ++i) x.row(i) << -10.0 + rng.normal() * 0.1, rng.normal() * 0.1;
  const KMeansResult r = kmeans(x, 2, {5, 100, 7});
  for (int i = 1; i < 20; ++i) CHECK(r.labels[i] == r.labels[0]);
  for (int i = 21; i < 40; ++i) CHECK(r.labels[i] == r.labels[20]);
  CHECK(r.labels[0] != r.labels[20]);
}

TEST_CASE("identical points: empty cluster repaired, terminates") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(6, 3);
  const KMeansResult r = kmeans(x, 2, {3, 50, 1});
  CHECK(r.labels.size() == 6);
  // Repair guarantees both clusters exist.
  CHECK(std::count(r.labels.begin(), r.labels.end(), 0) >= 1);
  CHECK(std::count(r.labels.begin(), r.labels.end(), 1) >= 1);
  CHECK(r.inertia == doctest::Approx(0.0));
}

TEST_CASE("inertia non-increasing across Lloyd iterations") {
  Rng rng(5);
  Eigen::MatrixXd x(60, 3);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const KMeansResult r = kmeans(x, 4, {1, 100, 11});
  for (std::size_t t = 1; t < r.inertia_trace.size(); ++t)
    CHECK(r.inertia_trace[t] <= r.inertia_trace[t - 1] + 1e-9);
}

TEST_CASE("deterministic under seed, errors on k > n") {
  Rng rng(7);
  Eigen::MatrixXd x(15, 2);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const KMeansResult a = kmeans(x, 3, {4, 100, 9});
  const KMeansResult b = kmeans(x, 3, {4, 100, 9});
  CHECK(a.labels == b.labels);
  CHECK(a.inertia == b.inertia);
  CHECK_THROWS_AS(kmeans(x, 16, {1, 10, 0}), std::invalid_argument);
}

}  // TEST_SUITE
