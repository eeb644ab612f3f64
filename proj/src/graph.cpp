#include "fgwc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fgwc/io.hpp"

namespace fgwc {

SparseMat AttributeGraph::adjacency() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    trips.emplace_back(u, v, 1.0);
    trips.emplace_back(v, u, 1.0);
  }
  SparseMat a(n_nodes, n_nodes);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

void AttributeGraph::validate() const {
  if (n_nodes < 0) throw std::runtime_error("negative node count");
  if (features.rows() != n_nodes) throw std::runtime_error("feature row count != n_nodes");
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
      throw std::runtime_error("edge endpoint out of range");
    if (u >= v) throw std::runtime_error("edge not stored as u < v");
  }
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i - 1] < edges[i])) throw std::runtime_error("edge list not sorted/unique");
  if (!labels.empty()) {
    if (static_cast<int>(labels.size()) != n_nodes)
      throw std::runtime_error("label count != n_nodes");
    for (int y : labels)
      if (y < 0 || y >= n_classes) throw std::runtime_error("label out of range");
  }
}

AugmentationConfig::AugmentationConfig(double pe_, double px_, std::uint64_t seed_)
    : pe(pe_), px(px_), seed(seed_) {
  if (pe < 0.0 || pe >= 1.0) throw std::invalid_argument("pe must be in [0, 1)");
  if (px < 0.0 || px >= 1.0) throw std::invalid_argument("px must be in [0, 1)");
}

AttributeGraph load_graph(const std::string& edge_list_path,
                          const std::string& features_path,
                          const std::string& labels_path,
                          LoadStats* stats) {
  AttributeGraph g;
  g.features = read_matrix_auto(features_path);
  g.n_nodes = static_cast<int>(g.features.rows());

  std::ifstream f(edge_list_path);
  if (!f) throw std::runtime_error(edge_list_path + ": cannot open");
  std::set<std::pair<int, int>> seen;
  LoadStats local;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long long u, v;
    if (!(ss >> u >> v))
      throw std::runtime_error(edge_list_path + ": unparseable line " + std::to_string(lineno));
    if (u < 0 || v < 0 || u >= g.n_nodes || v >= g.n_nodes)
      throw std::runtime_error(edge_list_path + ": node id out of range at line " +
                               std::to_string(lineno));
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    const int ui = static_cast<int>(u), vi = static_cast<int>(v);
    if (!seen.insert({std::min(ui, vi), std::max(ui, vi)}).second)
      ++local.duplicate_edges_dropped;
  }
  g.edges.assign(seen.begin(), seen.end());

  if (!labels_path.empty()) {
    g.labels = read_label_file(labels_path);
    if (static_cast<int>(g.labels.size()) != g.n_nodes)
      throw std::runtime_error(labels_path + ": row-count mismatch, " +
                               std::to_string(g.labels.size()) + " labels for " +
                               std::to_string(g.n_nodes) + " nodes");
    int cmax = -1;
    for (int y : g.labels) {
      if (y < 0) throw std::runtime_error(labels_path + ": negative label");
      cmax = std::max(cmax, y);
    }
    g.n_classes = cmax + 1;
  }
  if (stats) *stats = local;
  g.validate();
  return g;
}

AttributeGraph augment(const AttributeGraph& g, const AugmentationConfig& cfg, Rng& rng) {
  AttributeGraph out = g;

  const std::size_t e = g.edges.size();
  const std::size_t drop_e = static_cast<std::size_t>(std::floor(cfg.pe * static_cast<double>(e)));
  if (drop_e > 0) {
    std::vector<char> removed(e, 0);
    for (std::size_t idx : rng.sample_without_replacement(e, drop_e)) removed[idx] = 1;
    out.edges.clear();
    out.edges.reserve(e - drop_e);
    for (std::size_t i = 0; i < e; ++i)
      if (!removed[i]) out.edges.push_back(g.edges[i]);
  }

  const std::size_t d0 = static_cast<std::size_t>(g.features.cols());
  const std::size_t drop_d =
      static_cast<std::size_t>(std::floor(cfg.px * static_cast<double>(d0)));
  if (drop_d > 0) {
    for (std::size_t col : rng.sample_without_replacement(d0, drop_d))
      out.features.col(static_cast<Eigen::Index>(col)).setZero();
  }
  return out;
}

NormalizedAdjacency gcn_normalize(const AttributeGraph& g) {
  const int n = g.n_nodes;
  std::vector<double> deg(n, 1.0);  // self-loop from A + I
  for (const auto& [u, v] : g.edges) {
    deg[u] += 1.0;
    deg[v] += 1.0;
  }
  std::vector<double> dinv(n);
  for (int i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(deg[i]);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(g.edges.size() * 2 + n);
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, dinv[i] * dinv[i]);
  for (const auto& [u, v] : g.edges) {
    const double w = dinv[u] * dinv[v];
    trips.emplace_back(u, v, w);
    trips.emplace_back(v, u, w);
  }
  NormalizedAdjacency out;
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  return out;
}

AttributeGraph generate_sbm(const SbmSpec& spec) {
  if (spec.p_in <= spec.p_out) throw std::invalid_argument("SBM requires p_in > p_out");
  const int blocks = static_cast<int>(spec.n_per_block.size());
  if (blocks == 0) throw std::invalid_argument("SBM requires at least one block");
  if (spec.feature_centers.rows() != blocks)
    throw std::invalid_argument("one feature center per block required");

  AttributeGraph g;
  g.n_nodes = 0;
  for (int c : spec.n_per_block) g.n_nodes += c;
  g.n_classes = blocks;
  g.labels.reserve(g.n_nodes);
  for (int b = 0; b < blocks; ++b)
    for (int i = 0; i < spec.n_per_block[b]; ++i) g.labels.push_back(b);

  Rng rng(spec.seed);
  for (int i = 0; i < g.n_nodes; ++i) {
    for (int j = i + 1; j < g.n_nodes; ++j) {
      const double p = (g.labels[i] == g.labels[j]) ? spec.p_in : spec.p_out;
      if (rng.uniform() < p) g.edges.emplace_back(i, j);
    }
  }

  const Eigen::Index d0 = spec.feature_centers.cols();
  g.features.resize(g.n_nodes, d0);
  for (int i = 0; i < g.n_nodes; ++i)
    for (Eigen::Index j = 0; j < d0; ++j)
      g.features(i, j) = spec.feature_centers(g.labels[i], j) + spec.noise * rng.normal();

  g.validate();
  return g;
}

SparseMat sparse_identity(int n) {
  SparseMat id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace fgwc
