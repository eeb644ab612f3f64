// fgwclust: fused Gromov-Wasserstein graph clustering CLI.
//
//   fgwclust train --config cfg.json --data DIR --out DIR [--set k=v ...]
//   fgwclust eval  --checkpoint FILE --data DIR --out DIR [--clusters C]
//   fgwclust synth --spec spec.json --out DIR
//   fgwclust convert --content FILE --cites FILE --out DIR
//
// Exit codes: 0 ok, 1 config error, 2 data error, 3 numerical abort.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fgwc/graph.hpp"
#include "fgwc/io.hpp"
#include "fgwc/kmeans.hpp"
#include "fgwc/metrics.hpp"
#include "fgwc/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Applies "--set a.b=value" overrides onto a parsed config document.
void apply_override(json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
  const std::string key = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted strings
  }
  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    if (dot == std::string::npos) {
      (*node)[key.substr(pos)] = value;
      break;
    }
    node = &(*node)[key.substr(pos, dot - pos)];
    pos = dot + 1;
  }
}

struct DatasetPaths {
  std::string edges;
  std::string features;
  std::string labels;  // empty when absent
};

DatasetPaths locate_dataset(const std::string& dir) {
  DatasetPaths p;
  p.edges = dir + "/edges.txt";
  if (fs::exists(dir + "/features.fgm"))
    p.features = dir + "/features.fgm";
  else
    p.features = dir + "/features.csv";
  if (fs::exists(dir + "/labels.txt")) p.labels = dir + "/labels.txt";
  if (!fs::exists(p.edges)) throw std::runtime_error("missing edge list: " + p.edges);
  if (!fs::exists(p.features)) throw std::runtime_error("missing features file: " + p.features);
  return p;
}

void write_manifest(const std::string& out_dir, const std::string& config_text,
                    std::uint64_t seed, const std::string& dataset_id,
                    const std::string& started, const json& metric_summary,
                    const std::vector<std::string>& files) {
  json m;
  m["config_hash"] = fnv1a_hex(config_text);
  m["config"] = json::parse(config_text);
  m["seed"] = seed;
  m["dataset"] = dataset_id;
  m["started"] = started;
  m["finished"] = iso_timestamp();
  m["metrics"] = metric_summary;
  m["outputs"] = files;
  fgwc::write_text_file(out_dir + "/manifest.json", m.dump(2) + "\n");
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir, const std::vector<std::string>& overrides,
              std::int64_t seed_flag) {
  const std::string started = iso_timestamp();
  fgwc::TrainConfig cfg;
  std::string canonical;
  try {
    json j = json::parse(fgwc::read_text_file(config_path));
    for (const auto& kv : overrides) apply_override(j, kv);
    if (seed_flag >= 0) j["seed"] = static_cast<std::uint64_t>(seed_flag);
    cfg = fgwc::TrainConfig::from_json_string(j.dump());
    canonical = cfg.to_json_string();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  fgwc::AttributeGraph g;
  try {
    const DatasetPaths p = locate_dataset(data_dir);
    g = fgwc::load_graph(p.edges, p.features, p.labels);
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }

  fs::create_directories(out_dir);
  try {
    const fgwc::TrainedModel model = fgwc::train(g, cfg);
    fgwc::save_checkpoint(out_dir + "/checkpoint.fgm", model);
    std::ofstream loss(out_dir + "/loss.csv");
    loss << "epoch,loss\n";
    loss.precision(17);
    for (std::size_t i = 0; i < model.loss_trace.size(); ++i)
      loss << i << ',' << model.loss_trace[i] << '\n';
    write_manifest(out_dir, canonical, cfg.seed, data_dir, started, json::object(),
                   {"checkpoint.fgm", "loss.csv"});
  } catch (const std::exception& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return kExitNumeric;
  }
  std::cout << "trained " << cfg.T << " epochs; checkpoint at " << out_dir
            << "/checkpoint.fgm\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_dir,
             const std::string& out_dir, int clusters_flag, std::uint64_t seed) {
  const std::string started = iso_timestamp();
  fgwc::TrainedModel model;
  try {
    model = fgwc::load_checkpoint(checkpoint_path);
  } catch (const std::exception& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitData;
  }

  fgwc::AttributeGraph g;
  try {
    const DatasetPaths p = locate_dataset(data_dir);
    g = fgwc::load_graph(p.edges, p.features, p.labels);
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }

  fs::create_directories(out_dir);
  Eigen::MatrixXd r;
  try {
    r = fgwc::infer(g, model);
  } catch (const std::exception& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return kExitData;
  }
  fgwc::write_fgm(out_dir + "/embeddings.fgm", r);
  std::vector<std::string> files = {"embeddings.fgm"};
  json summary = json::object();

  const int c = g.has_labels() ? g.n_classes : clusters_flag;
  if (c > 0) {
    fgwc::KMeansConfig kcfg;
    kcfg.seed = seed;
    const fgwc::KMeansResult km = fgwc::kmeans(r, c, kcfg);
    fgwc::write_label_file(out_dir + "/pred_labels.txt", km.labels);
    files.push_back("pred_labels.txt");

    if (g.has_labels()) {
      fgwc::ClusterLabels pred{km.labels, c};
      fgwc::ClusterLabels truth{g.labels, g.n_classes};
      const fgwc::MetricsReport rep = fgwc::evaluate(pred, truth);
      fgwc::write_text_file(out_dir + "/metrics.json", rep.to_json_string());
      fgwc::write_text_file(out_dir + "/confusion.tsv", rep.confusion_tsv());
      fgwc::write_text_file(out_dir + "/histograms.tsv", rep.histograms_tsv());
      files.insert(files.end(), {"metrics.json", "confusion.tsv", "histograms.tsv"});
      summary = {{"acc", rep.acc}, {"macro_f1", rep.macro_f1}, {"nmi", rep.nmi}, {"ari", rep.ari}};
      std::cout << "acc=" << rep.acc << " f1=" << rep.macro_f1 << " nmi=" << rep.nmi
                << " ari=" << rep.ari << "\n";
    }
  }
  write_manifest(out_dir, model.config.to_json_string(), seed, data_dir, started, summary, files);
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  fgwc::SbmSpec spec;
  try {
    const json j = json::parse(fgwc::read_text_file(spec_path));
    spec.n_per_block = j.at("n_per_block").get<std::vector<int>>();
    spec.p_in = j.at("p_in").get<double>();
    spec.p_out = j.at("p_out").get<double>();
    spec.noise = j.value("noise", 1.0);
    spec.seed = j.value("seed", 0ULL);
    const auto centers = j.at("feature_centers").get<std::vector<std::vector<double>>>();
    if (centers.empty()) throw std::invalid_argument("feature_centers is empty");
    spec.feature_centers.resize((Eigen::Index)centers.size(), (Eigen::Index)centers[0].size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (centers[i].size() != centers[0].size())
        throw std::invalid_argument("ragged feature_centers");
      for (std::size_t k = 0; k < centers[i].size(); ++k)
        spec.feature_centers((Eigen::Index)i, (Eigen::Index)k) = centers[i][k];
    }
  } catch (const std::exception& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const fgwc::AttributeGraph g = fgwc::generate_sbm(spec);
    fs::create_directories(out_dir);
    std::ofstream ef(out_dir + "/edges.txt");
    for (const auto& [u, v] : g.edges) ef << u << ' ' << v << '\n';
    fgwc::write_csv_matrix(out_dir + "/features.csv", g.features);
    fgwc::write_label_file(out_dir + "/labels.txt", g.labels);
    std::cout << "wrote " << g.n_nodes << " nodes, " << g.n_edges() << " edges to " << out_dir
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "synth failed: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}

// Converts the classic citation-network release format (a .content file with
// "id feat... label" rows and a .cites file with "cited citing" rows) into
// the edges/features/labels layout this tool consumes.
int cmd_convert(const std::string& content_path, const std::string& cites_path,
                const std::string& out_dir) {
  try {
    std::ifstream content(content_path);
    if (!content) throw std::runtime_error(content_path + ": cannot open");
    std::vector<std::vector<double>> feats;
    std::vector<std::string> class_names;
    std::vector<int> labels;
    std::map<std::string, int> id_index, class_index;

    std::string line;
    while (std::getline(content, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::vector<std::string> tok;
      std::string t;
      while (ss >> t) tok.push_back(t);
      if (tok.size() < 3) throw std::runtime_error("bad .content row: " + line);
      id_index[tok.front()] = (int)feats.size();
      std::vector<double> row(tok.size() - 2);
      for (std::size_t i = 1; i + 1 < tok.size(); ++i) row[i - 1] = std::stod(tok[i]);
      feats.push_back(std::move(row));
      auto [it, fresh] = class_index.try_emplace(tok.back(), (int)class_index.size());
      labels.push_back(it->second);
    }
    if (feats.empty()) throw std::runtime_error("empty .content file");

    std::ifstream cites(cites_path);
    if (!cites) throw std::runtime_error(cites_path + ": cannot open");
    std::set<std::pair<int, int>> edges;
    int skipped = 0;
    std::string a, b;
    while (cites >> a >> b) {
      const auto ia = id_index.find(a);
      const auto ib = id_index.find(b);
      if (ia == id_index.end() || ib == id_index.end()) {
        ++skipped;  // citations into papers without content rows
        continue;
      }
      if (ia->second == ib->second) continue;
      edges.insert({std::min(ia->second, ib->second), std::max(ia->second, ib->second)});
    }

    fs::create_directories(out_dir);
    std::ofstream ef(out_dir + "/edges.txt");
    for (const auto& [u, v] : edges) ef << u << ' ' << v << '\n';
    Eigen::MatrixXd fm((Eigen::Index)feats.size(), (Eigen::Index)feats[0].size());
    for (std::size_t i = 0; i < feats.size(); ++i)
      for (std::size_t j = 0; j < feats[i].size(); ++j)
        fm((Eigen::Index)i, (Eigen::Index)j) = feats[i][j];
    fgwc::write_fgm(out_dir + "/features.fgm", fm);
    fgwc::write_label_file(out_dir + "/labels.txt", labels);
    std::cout << "converted " << feats.size() << " nodes, " << edges.size() << " edges, "
              << class_index.size() << " classes";
    if (skipped) std::cout << " (" << skipped << " dangling citations skipped)";
    std::cout << "\n";
  } catch (const std::exception& e) {
    std::cerr << "convert failed: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("FGW_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) Eigen::setNbThreads(t);
  }

  CLI::App app{"Fused Gromov-Wasserstein graph node clustering"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, checkpoint_path, spec_path;
  std::string content_path, cites_path;
  std::vector<std::string> overrides;
  std::int64_t seed_flag = -1;
  std::uint64_t eval_seed = 0;
  int clusters = 0;

  auto* train = app.add_subcommand("train", "Train on a dataset directory");
  train->add_option("--config", config_path, "TrainConfig JSON")->required();
  train->add_option("--data", data_dir, "dataset directory")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--seed", seed_flag, "override config seed");
  train->add_option("--set", overrides, "config override key=value")->take_all();

  auto* eval = app.add_subcommand("eval", "Cluster and score a checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval->add_option("--data", data_dir, "dataset directory")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_option("--clusters", clusters, "cluster count when labels are absent");
  eval->add_option("--seed", eval_seed, "k-means seed");

  auto* synth = app.add_subcommand("synth", "Generate a block-model dataset");
  synth->add_option("--spec", spec_path, "SBM spec JSON")->required();
  synth->add_option("--out", out_dir, "output directory")->required();

  auto* convert = app.add_subcommand("convert", "Convert a citation dataset");
  convert->add_option("--content", content_path, ".content file")->required();
  convert->add_option("--cites", cites_path, ".cites file")->required();
  convert->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) return cmd_train(config_path, data_dir, out_dir, overrides, seed_flag);
  if (eval->parsed()) return cmd_eval(checkpoint_path, data_dir, out_dir, clusters, eval_seed);
  if (synth->parsed()) return cmd_synth(spec_path, out_dir);
  if (convert->parsed()) return cmd_convert(content_path, cites_path, out_dir);
  return 0;
}
