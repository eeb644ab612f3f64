#pragma once

#include <string>
#include <vector>

#include "fgwc/graph.hpp"
#include "fgwc/model.hpp"
#include "fgwc/ot.hpp"
#include "fgwc/prototypes.hpp"

namespace fgwc {

struct AblationFlags {
  bool no_B = false;           // pin the prototype graph to I_S inside FGW
  bool no_A = false;           // replace the data adjacency by I_N inside FGW
  bool fixed_momentum = false; // beta1 = beta2 = 1, frozen B and nu
};

struct EncoderDims {
  int d1 = 256;
  int d_h = 256;
  int d = 64;
};

struct TrainConfig {
  int S = 0;                 // prototype count
  double alpha = 0.5;        // FGW trade-off
  double tau = 0.5;          // loss temperature
  double pe = 0.0;
  double px = 0.0;
  int T = 0;                 // epochs
  double lr = 5e-4;
  double weight_decay = 0.0;
  double beta1 = 0.99;
  double beta2 = 0.999;
  OTConfig ot;
  std::uint64_t seed = 0;
  AblationFlags ablation;
  EncoderDims dims;

  void validate() const;
  static TrainConfig from_json_string(const std::string& text);
  std::string to_json_string() const;  // canonical (sorted keys)
};

struct TrainedModel {
  ModelParams params;
  PrototypeState proto_state;
  TrainConfig config;
  std::vector<double> loss_trace;
};

// Full training loop: per epoch, two augmented views are encoded, the
// momentum state steps through both views, each view's fused-OT assignment
// is computed against its (B, nu), and one Adam step follows the swapped
// cross-entropy loss. Deterministic under config.seed.
TrainedModel train(const AttributeGraph& g, const TrainConfig& cfg);

// Context-aware representation R of the un-augmented graph. Pure.
Eigen::MatrixXd infer(const AttributeGraph& g, const TrainedModel& model);

// Checkpoint container: u64 header length, JSON header (tensor directory +
// config echo), then FGM1 tensor blobs at the recorded offsets.
void save_checkpoint(const std::string& path, const TrainedModel& model);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace fgwc
