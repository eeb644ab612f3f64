#include "fgwc/training.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fgwc {

using nlohmann::json;

void TrainConfig::validate() const {
  if (S < 2) throw std::invalid_argument("S must be >= 2");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0, 1]");
  if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
  if (pe < 0.0 || pe >= 1.0) throw std::invalid_argument("pe must be in [0, 1)");
  if (px < 0.0 || px >= 1.0) throw std::invalid_argument("px must be in [0, 1)");
  if (T < 0) throw std::invalid_argument("T must be >= 0");
  if (lr <= 0.0) throw std::invalid_argument("lr must be > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
  if (beta1 < 0.0 || beta1 > 1.0 || beta2 < 0.0 || beta2 > 1.0)
    throw std::invalid_argument("momentum weights must be in [0, 1]");
  if (dims.d1 < 1 || dims.d_h < 1 || dims.d < 1)
    throw std::invalid_argument("encoder dims must be >= 1");
  ot.validate();
}

TrainConfig TrainConfig::from_json_string(const std::string& text) {
  json j = json::parse(text);
  TrainConfig c;
  c.S = j.at("S").get<int>();
  c.alpha = j.value("alpha", c.alpha);
  c.tau = j.value("tau", c.tau);
  c.pe = j.value("pe", c.pe);
  c.px = j.value("px", c.px);
  c.T = j.value("T", c.T);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.seed = j.value("seed", c.seed);
  if (j.contains("ot")) {
    const json& o = j.at("ot");
    c.ot.epsilon = o.value("epsilon", c.ot.epsilon);
    c.ot.sinkhorn_max_iter = o.value("sinkhorn_max_iter", c.ot.sinkhorn_max_iter);
    c.ot.sinkhorn_tol = o.value("sinkhorn_tol", c.ot.sinkhorn_tol);
    c.ot.outer_max_iter = o.value("outer_max_iter", c.ot.outer_max_iter);
    c.ot.outer_tol = o.value("outer_tol", c.ot.outer_tol);
  }
  if (j.contains("ablation")) {
    const json& a = j.at("ablation");
    c.ablation.no_B = a.value("no_B", false);
    c.ablation.no_A = a.value("no_A", false);
    c.ablation.fixed_momentum = a.value("fixed_momentum", false);
  }
  if (j.contains("dims")) {
    const json& d = j.at("dims");
    c.dims.d1 = d.value("d1", c.dims.d1);
    c.dims.d_h = d.value("d_h", c.dims.d_h);
    c.dims.d = d.value("d", c.dims.d);
  }
  c.validate();
  return c;
}

std::string TrainConfig::to_json_string() const {
  json j;
  j["S"] = S;
  j["alpha"] = alpha;
  j["tau"] = tau;
  j["pe"] = pe;
  j["px"] = px;
  j["T"] = T;
  j["lr"] = lr;
  j["weight_decay"] = weight_decay;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["seed"] = seed;
  j["ot"] = {{"epsilon", ot.epsilon},
             {"sinkhorn_max_iter", ot.sinkhorn_max_iter},
             {"sinkhorn_tol", ot.sinkhorn_tol},
             {"outer_max_iter", ot.outer_max_iter},
             {"outer_tol", ot.outer_tol}};
  j["ablation"] = {{"no_B", ablation.no_B},
                   {"no_A", ablation.no_A},
                   {"fixed_momentum", ablation.fixed_momentum}};
  j["dims"] = {{"d1", dims.d1}, {"d_h", dims.d_h}, {"d", dims.d}};
  return j.dump(2);
}

TrainedModel train(const AttributeGraph& g, const TrainConfig& cfg) {
  cfg.validate();
  g.validate();
  if (g.has_labels() && cfg.S < g.n_classes)
    std::cerr << "warning: S = " << cfg.S << " is below the known class count " << g.n_classes
              << "\n";

  Rng master(cfg.seed);
  ModelDims mdims{g.feature_dim(), cfg.dims.d1, cfg.dims.d_h, cfg.dims.d, cfg.S};
  TrainedModel model;
  model.config = cfg;
  model.params = ModelParams::init(mdims, master);

  const double b1 = cfg.ablation.fixed_momentum ? 1.0 : cfg.beta1;
  const double b2 = cfg.ablation.fixed_momentum ? 1.0 : cfg.beta2;
  model.proto_state = init_state(cfg.S, b1, b2);

  AdamConfig adam;
  adam.lr = cfg.lr;
  adam.weight_decay = cfg.weight_decay;
  OptimizerState opt = OptimizerState::init(mdims, adam);

  OTConfig ot = cfg.ot;
  ot.alpha = cfg.alpha;
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(g.n_nodes, 1.0 / g.n_nodes);
  const Eigen::MatrixXd b_identity = Eigen::MatrixXd::Identity(cfg.S, cfg.S);

  for (int epoch = 0; epoch < cfg.T; ++epoch) {
    Rng rng1 = master.spawn();
    Rng rng2 = master.spawn();
    const AugmentationConfig aug(cfg.pe, cfg.px, cfg.seed);
    const AttributeGraph g1 = augment(g, aug, rng1);
    const AttributeGraph g2 = augment(g, aug, rng2);

    GradientTape tape1, tape2;
    const Eigen::MatrixXd z1 = forward(gcn_normalize(g1), g1.features, model.params, tape1);
    const Eigen::MatrixXd z2 = forward(gcn_normalize(g2), g2.features, model.params, tape2);

    const Eigen::MatrixXd r1 = compute_R(z1, model.params.prototypes);
    const Eigen::MatrixXd r2 = compute_R(z2, model.params.prototypes);
    const Eigen::MatrixXd p1 = softmax_P(r1, 1.0);
    const Eigen::MatrixXd p2 = softmax_P(r2, 1.0);
    const Eigen::MatrixXd p1_tau = softmax_P(r1, cfg.tau);
    const Eigen::MatrixXd p2_tau = softmax_P(r2, cfg.tau);

    const ViewPrototypes vp = step_views(model.proto_state, p1, p2);
    const Eigen::MatrixXd& b1m = cfg.ablation.no_B ? b_identity : vp.b1;
    const Eigen::MatrixXd& b2m = cfg.ablation.no_B ? b_identity : vp.b2;
    const SparseMat a1 = cfg.ablation.no_A ? sparse_identity(g.n_nodes) : g1.adjacency();
    const SparseMat a2 = cfg.ablation.no_A ? sparse_identity(g.n_nodes) : g2.adjacency();

    Assignment q1, q2;
    try {
      const Coupling c1 = entropic_fgw(-r1, a1, b1m, Marginals::make(mu, vp.nu1), ot);
      const Coupling c2 = entropic_fgw(-r2, a2, b2m, Marginals::make(mu, vp.nu2), ot);
      q1 = coupling_to_assignment(c1);
      q2 = coupling_to_assignment(c2);
    } catch (const std::exception& e) {
      throw std::runtime_error("FGW solve failed at epoch " + std::to_string(epoch) + ": " +
                               e.what());
    }

    const double loss = swapped_loss(q1.q, q2.q, p1_tau, p2_tau);
    if (!std::isfinite(loss)) {
      std::ostringstream diag;
      diag << "non-finite loss at epoch " << epoch << " (|Q1|max=" << q1.q.maxCoeff()
           << ", P1 min=" << p1_tau.minCoeff() << ", P2 min=" << p2_tau.minCoeff() << ")";
      throw std::runtime_error(diag.str());
    }

    const ModelGradients grads =
        swapped_loss_backward(tape1, tape2, model.params, q1.q, q2.q, p1_tau, p2_tau, cfg.tau);
    adam_step(model.params, grads, opt);
    model.loss_trace.push_back(loss);
  }
  return model;
}

Eigen::MatrixXd infer(const AttributeGraph& g, const TrainedModel& model) {
  if (g.feature_dim() != model.params.gcn_weight.rows())
    throw std::invalid_argument("feature width does not match the trained model");
  GradientTape tape;
  const Eigen::MatrixXd z = forward(gcn_normalize(g), g.features, model.params, tape);
  return compute_R(z, model.params.prototypes);
}

namespace {

std::vector<std::pair<std::string, Eigen::MatrixXd>> tensor_table(const TrainedModel& m) {
  std::vector<std::pair<std::string, Eigen::MatrixXd>> t;
  t.emplace_back("gcn_weight", m.params.gcn_weight);
  t.emplace_back("gcn_bias", m.params.gcn_bias.transpose());
  t.emplace_back("proj_weight1", m.params.proj_weight1);
  t.emplace_back("proj_bias1", m.params.proj_bias1.transpose());
  t.emplace_back("proj_weight2", m.params.proj_weight2);
  t.emplace_back("proj_bias2", m.params.proj_bias2.transpose());
  t.emplace_back("prototypes", m.params.prototypes);
  t.emplace_back("proto_B", m.proto_state.b);
  t.emplace_back("proto_nu", m.proto_state.nu.transpose());
  return t;
}

void write_fgm_block(std::ostream& f, const Eigen::MatrixXd& m) {
  f.write("FGM1", 4);
  const std::uint64_t rows = m.rows(), cols = m.cols();
  f.write(reinterpret_cast<const char*>(&rows), 8);
  f.write(reinterpret_cast<const char*>(&cols), 8);
  std::vector<float> row(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = (float)m(i, j);
    f.write(reinterpret_cast<const char*>(row.data()), (std::streamsize)(row.size() * 4));
  }
}

Eigen::MatrixXd read_fgm_block(std::istream& f) {
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "FGM1", 4) != 0)
    throw std::runtime_error("bad FGM1 block in checkpoint");
  std::uint64_t rows = 0, cols = 0;
  f.read(reinterpret_cast<char*>(&rows), 8);
  f.read(reinterpret_cast<char*>(&cols), 8);
  Eigen::MatrixXd m(rows, cols);
  std::vector<float> row(cols);
  for (std::uint64_t i = 0; i < rows; ++i) {
    f.read(reinterpret_cast<char*>(row.data()), (std::streamsize)(cols * 4));
    if (!f) throw std::runtime_error("truncated FGM1 block in checkpoint");
    for (std::uint64_t j = 0; j < cols; ++j) m(i, j) = row[j];
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainedModel& model) {
  const auto tensors = tensor_table(model);

  json header;
  header["format"] = "fgwclust-checkpoint-v1";
  header["config"] = json::parse(model.config.to_json_string());
  header["loss_trace"] = model.loss_trace;
  json dir = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : tensors) {
    const std::uint64_t bytes = 4 + 8 + 8 + (std::uint64_t)m.size() * 4;
    dir.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    offset += bytes;
  }
  header["tensors"] = dir;
  const std::string htext = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  const std::uint64_t hlen = htext.size();
  f.write(reinterpret_cast<const char*>(&hlen), 8);
  f.write(htext.data(), (std::streamsize)htext.size());
  for (const auto& [name, m] : tensors) write_fgm_block(f, m);
  if (!f) throw std::runtime_error(path + ": write error");
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open");
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 8);
  std::string htext(hlen, '\0');
  f.read(htext.data(), (std::streamsize)hlen);
  if (!f) throw std::runtime_error(path + ": truncated header");
  json header = json::parse(htext);
  if (header.value("format", "") != "fgwclust-checkpoint-v1")
    throw std::runtime_error(path + ": unknown checkpoint format");

  TrainedModel m;
  m.config = TrainConfig::from_json_string(header.at("config").dump());
  m.loss_trace = header.value("loss_trace", std::vector<double>{});

  std::map<std::string, Eigen::MatrixXd> blobs;
  for (const auto& entry : header.at("tensors")) blobs[entry.at("name")] = read_fgm_block(f);

  const auto need = [&](const std::string& name) -> Eigen::MatrixXd& {
    auto it = blobs.find(name);
    if (it == blobs.end()) throw std::runtime_error(path + ": missing tensor " + name);
    return it->second;
  };
  m.params.gcn_weight = need("gcn_weight");
  m.params.gcn_bias = need("gcn_bias").row(0).transpose();
  m.params.proj_weight1 = need("proj_weight1");
  m.params.proj_bias1 = need("proj_bias1").row(0).transpose();
  m.params.proj_weight2 = need("proj_weight2");
  m.params.proj_bias2 = need("proj_bias2").row(0).transpose();
  m.params.prototypes = need("prototypes");
  m.proto_state.b = need("proto_B");
  m.proto_state.nu = need("proto_nu").row(0).transpose();
  m.proto_state.beta1 = m.config.ablation.fixed_momentum ? 1.0 : m.config.beta1;
  m.proto_state.beta2 = m.config.ablation.fixed_momentum ? 1.0 : m.config.beta2;
  return m;
}

}  // namespace fgwc
