#include "fgwc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fgwc {

namespace {

double binom2(double x) { return x * (x - 1.0) / 2.0; }

std::vector<std::vector<long long>> contingency(const ClusterLabels& pred,
                                                const ClusterLabels& truth, int c) {
  std::vector<std::vector<long long>> m(c, std::vector<long long>(c, 0));
  for (std::size_t n = 0; n < pred.labels.size(); ++n) ++m[pred.labels[n]][truth.labels[n]];
  return m;
}

}  // namespace

ClusterLabels ClusterLabels::from(std::vector<int> labels) {
  ClusterLabels out;
  out.labels = std::move(labels);
  int cmax = -1;
  for (int y : out.labels) cmax = std::max(cmax, y);
  out.n_classes = cmax + 1;
  out.validate();
  return out;
}

void ClusterLabels::validate() const {
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw std::invalid_argument("label out of range");
}

std::vector<int> solve_assignment_min(const std::vector<std::vector<double>>& cost) {
  // Shortest-augmenting-path formulation with dual potentials u, v.
  const int n = (int)cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

namespace {

// Maximum achievable sum of M[i, sigma(i)] with `rows`/`cols` marking the
// remaining free indices. Entries are integer counts, so the JV potentials
// stay exactly representable and the total is exact.
long long lsa_submax(const std::vector<std::vector<long long>>& m, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
  if (rows.empty()) return 0;
  std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) cost[i][j] = -(double)m[rows[i]][cols[j]];
  const std::vector<int> sol = solve_assignment_min(cost);
  long long total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) total += m[rows[i]][cols[sol[i]]];
  return total;
}

}  // namespace

std::vector<int> lsa_map(const ClusterLabels& pred, const ClusterLabels& truth) {
  if (pred.labels.size() != truth.labels.size())
    throw std::invalid_argument("pred and truth length differ");
  pred.validate();
  truth.validate();
  const int c = std::max(pred.n_classes, truth.n_classes);
  const auto m = contingency(pred, truth, c);

  std::vector<int> all(c);
  for (int i = 0; i < c; ++i) all[i] = i;
  const long long best = lsa_submax(m, all, all);

  // Lowest-index tie-break: fix sigma row by row to the smallest column
  // that still admits an optimal completion.
  std::vector<int> sigma(c, -1);
  std::vector<int> free_cols = all;
  long long fixed = 0;
  for (int i = 0; i < c; ++i) {
    std::vector<int> rest_rows(all.begin() + i + 1, all.end());
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
      const int j = free_cols[k];
      std::vector<int> rest_cols = free_cols;
      rest_cols.erase(rest_cols.begin() + k);
      if (fixed + m[i][j] + lsa_submax(m, rest_rows, rest_cols) == best) {
        sigma[i] = j;
        fixed += m[i][j];
        free_cols = std::move(rest_cols);
        break;
      }
    }
  }
  return sigma;
}

MetricsReport evaluate(const ClusterLabels& pred, const ClusterLabels& truth) {
  if (pred.labels.size() != truth.labels.size())
    throw std::invalid_argument("pred and truth length differ");
  const std::size_t n = pred.labels.size();
  const int c = std::max(pred.n_classes, truth.n_classes);

  MetricsReport rep;
  rep.mapping = lsa_map(pred, truth);

  std::vector<int> mapped(n);
  for (std::size_t i = 0; i < n; ++i) mapped[i] = rep.mapping[pred.labels[i]];

  rep.confusion.assign(c, std::vector<long long>(c, 0));
  for (std::size_t i = 0; i < n; ++i) ++rep.confusion[mapped[i]][truth.labels[i]];

  long long correct = 0;
  for (int k = 0; k < c; ++k) correct += rep.confusion[k][k];
  rep.acc = (double)correct / (double)n;

  rep.pred_histogram.assign(c, 0);
  rep.true_histogram.assign(c, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++rep.pred_histogram[mapped[i]];
    ++rep.true_histogram[truth.labels[i]];
  }

  rep.per_class_f1.assign(c, 0.0);
  double f1_sum = 0.0;
  for (int k = 0; k < c; ++k) {
    const double tp = (double)rep.confusion[k][k];
    const double pred_k = (double)rep.pred_histogram[k];
    const double true_k = (double)rep.true_histogram[k];
    const double prec = pred_k > 0.0 ? tp / pred_k : 0.0;
    const double rec = true_k > 0.0 ? tp / true_k : 0.0;
    rep.per_class_f1[k] = (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    f1_sum += rep.per_class_f1[k];
  }
  rep.macro_f1 = f1_sum / (double)c;

  // NMI on the raw (unmapped) clustering; mutual information is invariant
  // to relabeling. Arithmetic-mean entropy normalization.
  const auto m = contingency(pred, truth, c);
  std::vector<double> a(c, 0.0), b(c, 0.0);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) {
      a[i] += (double)m[i][j];
      b[j] += (double)m[i][j];
    }
  const double nn = (double)n;
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) {
      const double nij = (double)m[i][j];
      if (nij > 0.0) mi += (nij / nn) * std::log(nij * nn / (a[i] * b[j]));
    }
  for (int i = 0; i < c; ++i) {
    if (a[i] > 0.0) ha -= (a[i] / nn) * std::log(a[i] / nn);
    if (b[i] > 0.0) hb -= (b[i] / nn) * std::log(b[i] / nn);
  }
  const double nmi_denom = 0.5 * (ha + hb);
  rep.nmi = nmi_denom > 0.0 ? mi / nmi_denom : 1.0;

  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) sum_ij += binom2((double)m[i][j]);
  for (int i = 0; i < c; ++i) {
    sum_a += binom2(a[i]);
    sum_b += binom2(b[i]);
  }
  const double expected = sum_a * sum_b / binom2(nn);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double ari_denom = max_index - expected;
  rep.ari = ari_denom != 0.0 ? (sum_ij - expected) / ari_denom : 1.0;

  return rep;
}

std::string MetricsReport::to_json_string() const {
  std::ostringstream ss;
  ss.precision(17);
  ss << "{\n";
  ss << "  \"acc\": " << acc << ",\n";
  ss << "  \"macro_f1\": " << macro_f1 << ",\n";
  ss << "  \"nmi\": " << nmi << ",\n";
  ss << "  \"ari\": " << ari << ",\n";
  ss << "  \"per_class_f1\": [";
  for (std::size_t i = 0; i < per_class_f1.size(); ++i) ss << (i ? ", " : "") << per_class_f1[i];
  ss << "],\n  \"mapping\": [";
  for (std::size_t i = 0; i < mapping.size(); ++i) ss << (i ? ", " : "") << mapping[i];
  ss << "],\n  \"confusion\": [";
  for (std::size_t i = 0; i < confusion.size(); ++i) {
    ss << (i ? ", [" : "[");
    for (std::size_t j = 0; j < confusion[i].size(); ++j) ss << (j ? ", " : "") << confusion[i][j];
    ss << "]";
  }
  ss << "],\n  \"pred_histogram\": [";
  for (std::size_t i = 0; i < pred_histogram.size(); ++i) ss << (i ? ", " : "") << pred_histogram[i];
  ss << "],\n  \"true_histogram\": [";
  for (std::size_t i = 0; i < true_histogram.size(); ++i) ss << (i ? ", " : "") << true_histogram[i];
  ss << "]\n}\n";
  return ss.str();
}

std::string MetricsReport::confusion_tsv() const {
  std::ostringstream ss;
  for (const auto& row : confusion) {
    for (std::size_t j = 0; j < row.size(); ++j) ss << (j ? "\t" : "") << row[j];
    ss << '\n';
  }
  return ss.str();
}

std::string MetricsReport::histograms_tsv() const {
  std::ostringstream ss;
  ss << "class\tpredicted\ttrue\n";
  for (std::size_t k = 0; k < pred_histogram.size(); ++k)
    ss << k << '\t' << pred_histogram[k] << '\t' << true_histogram[k] << '\n';
  return ss.str();
}

}  // namespace fgwc
