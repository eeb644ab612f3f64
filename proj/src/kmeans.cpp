#include "fgwc/kmeans.hpp"

#include <limits>
#include <stdexcept>

#include "fgwc/rng.hpp"

namespace fgwc {

namespace {

Eigen::MatrixXd plus_plus_seeding(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n))));

  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc >= target) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

struct LloydRun {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> inertia_trace;
};

LloydRun lloyd(const Eigen::MatrixXd& x, int k, int max_iter, Rng& rng) {
  const Eigen::Index n = x.rows();
  LloydRun run;
  run.centroids = plus_plus_seeding(x, k, rng);
  run.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> prev(run.labels);

  Eigen::VectorXd dist_to_own(n);
  for (int it = 0; it < max_iter; ++it) {
    // Assignment, lowest index on ties.
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (x.row(i) - run.centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (x.row(i) - run.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      run.labels[static_cast<std::size_t>(i)] = best;
      dist_to_own(i) = best_d;
    }

    // Repair empty clusters with the farthest point from its own centroid.
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(run.labels[i])];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(run.labels[i])] <= 1) continue;
        if (dist_to_own(i) > far_d) {
          far_d = dist_to_own(i);
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(run.labels[far])];
      run.labels[static_cast<std::size_t>(far)] = c;
      ++counts[static_cast<std::size_t>(c)];
      dist_to_own(far) = 0.0;
    }

    // Update.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) sums.row(run.labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int c = 0; c < k; ++c) run.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      inertia += (x.row(i) - run.centroids.row(run.labels[static_cast<std::size_t>(i)])).squaredNorm();
    run.inertia = inertia;
    run.inertia_trace.push_back(inertia);

    if (run.labels == prev) break;
    prev = run.labels;
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& x, int k, const KMeansConfig& cfg) {
  if (k < 1) throw std::invalid_argument("cluster count must be >= 1");
  if (k > x.rows()) throw std::invalid_argument("more clusters than points");
  if (cfg.n_init < 1) throw std::invalid_argument("n_init must be >= 1");

  Rng master(cfg.seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.n_init; ++r) {
    Rng restart_rng = master.spawn();
    LloydRun run = lloyd(x, k, cfg.max_iter, restart_rng);
    if (run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.inertia_trace = std::move(run.inertia_trace);
    }
  }
  return best;
}

}  // namespace fgwc
