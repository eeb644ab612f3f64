#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace fgwc {

struct KMeansConfig {
  int n_init = 10;
  int max_iter = 300;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // of the winning restart
};

// Lloyd iterations with k-means++ seeding, best inertia over n_init restarts.
// Empty clusters are repaired by stealing the globally farthest point.
// Deterministic under seed; distance ties resolve to the lowest index.
KMeansResult kmeans(const Eigen::MatrixXd& x, int k, const KMeansConfig& cfg);

}  // namespace fgwc
