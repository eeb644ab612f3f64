#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fgwc/rng.hpp"

namespace fgwc {

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Undirected attribute graph. Edges are stored once with u < v; the adjacency
// matrix materializes both directions with unit weights and an empty diagonal.
struct AttributeGraph {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, u < v, sorted, unique
  Eigen::MatrixXd features;                // N x d0
  std::vector<int> labels;                 // empty when unknown
  int n_classes = 0;                       // 0 when labels absent

  int n_edges() const { return static_cast<int>(edges.size()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  bool has_labels() const { return !labels.empty(); }

  // Binary symmetric adjacency, no self-loops.
  SparseMat adjacency() const;

  // Throws std::runtime_error on any violated structural invariant.
  void validate() const;
};

// D^{-1/2} (A + I) D^{-1/2} with D the degree of A + I.
struct NormalizedAdjacency {
  SparseMat matrix;
};

struct AugmentationConfig {
  double pe = 0.0;  // edge drop rate, [0, 1)
  double px = 0.0;  // feature-dimension drop rate, [0, 1)
  std::uint64_t seed = 0;

  AugmentationConfig() = default;
  AugmentationConfig(double pe_, double px_, std::uint64_t seed_);
};

struct LoadStats {
  int self_loops_dropped = 0;
  int duplicate_edges_dropped = 0;
};

// Reads the on-disk dataset triplet. Edge list: "u v" per line, 0-indexed.
// Features: CSV or FGM1 (sniffed). Labels: one integer per line, optional.
AttributeGraph load_graph(const std::string& edge_list_path,
                          const std::string& features_path,
                          const std::string& labels_path = "",
                          LoadStats* stats = nullptr);

// Drops floor(pe*E) undirected edges and zeroes floor(px*d0) feature columns,
// both sampled uniformly without replacement from the given stream.
AttributeGraph augment(const AttributeGraph& g, const AugmentationConfig& cfg, Rng& rng);

NormalizedAdjacency gcn_normalize(const AttributeGraph& g);

struct SbmSpec {
  std::vector<int> n_per_block;
  double p_in = 0.0;
  double p_out = 0.0;
  Eigen::MatrixXd feature_centers;  // one row per block
  double noise = 1.0;
  std::uint64_t seed = 0;
};

// Stochastic block model with Gaussian features around per-block centers;
// labels are block ids.
AttributeGraph generate_sbm(const SbmSpec& spec);

// N x N identity as a sparse "structure" matrix (the w/o A ablation).
SparseMat sparse_identity(int n);

}  // namespace fgwc
