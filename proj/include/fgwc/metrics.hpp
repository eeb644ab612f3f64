#pragma once

#include <string>
#include <vector>

namespace fgwc {

struct ClusterLabels {
  std::vector<int> labels;
  int n_classes = 0;  // labels lie in [0, n_classes)

  static ClusterLabels from(std::vector<int> labels);
  void validate() const;
};

// Clustering scores plus the diagnostics needed to read them: the optimal
// cluster-to-class mapping, mapped confusion matrix, per-class F1, and the
// predicted/true label histograms.
struct MetricsReport {
  double acc = 0.0;
  double macro_f1 = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::vector<long long>> confusion;  // rows: mapped pred, cols: truth
  std::vector<long long> pred_histogram;          // mapped predictions
  std::vector<long long> true_histogram;
  std::vector<int> mapping;                       // sigma: pred cluster -> class

  std::string to_json_string() const;
  std::string confusion_tsv() const;
  std::string histograms_tsv() const;
};

// Exact linear sum assignment maximizing sum_i M[i, sigma(i)] over the
// count matrix M[i][j] = |{n : pred = i and truth = j}|.
std::vector<int> lsa_map(const ClusterLabels& pred, const ClusterLabels& truth);

// ACC and Macro-F1 on sigma-mapped predictions; NMI with arithmetic-mean
// entropy normalization; ARI by adjusted pair counting.
MetricsReport evaluate(const ClusterLabels& pred, const ClusterLabels& truth);

// Minimize total cost over permutations of a square matrix (Jonker-Volgenant
// style shortest augmenting paths). Returns row -> column.
std::vector<int> solve_assignment_min(const std::vector<std::vector<double>>& cost);

}  // namespace fgwc
