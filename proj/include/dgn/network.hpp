#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dgn/neuron.hpp"
#include "dgn/types.hpp"

namespace dgn {

enum class NeuronKind { Dgn, Lif, Alif };

// Binary runs the network as a spiking system; SurrogatePrimal replaces the
// hard threshold with the surrogate's primitive so the whole map is
// differentiable (used by the finite-difference oracle only).
enum class SpikeMode { Binary, SurrogatePrimal };

struct LayerConfig {
  NeuronKind kind = NeuronKind::Dgn;
  Index units = 0;
  bool recurrent = false;
  double g_l = 1.0;
  double tau_s = 1.0;
  double dt = 1.0;
  double theta = 1.0;
  bool static_gate = true;
  bool dynamic_gate = true;
  Truncation truncation = Truncation::Sigmoid;
  SurrogateSpec surrogate;
  double alif_beta = 0.0;
  double alif_tau = 1.0;
  std::optional<double> lif_rho;  // LIF decay override
};

// One layer with its weights. Recurrent spikes from the previous timestep are
// treated as extra input channels with their own weights, so W and C have
// shape units x (in_channels + units) for recurrent layers. Column layout:
// feedforward channels first, then the recurrent block.
struct NetLayer {
  LayerConfig cfg;
  Index in_channels = 0;
  Matrix W;
  Matrix C;  // empty unless kind == Dgn

  Index units() const { return cfg.units; }
  Index total_in() const {
    return in_channels + (cfg.recurrent ? cfg.units : 0);
  }
  bool has_gate_weights() const { return cfg.kind == NeuronKind::Dgn; }

  auto W_ff() { return W.leftCols(in_channels); }
  auto W_rec() { return W.rightCols(cfg.recurrent ? cfg.units : 0); }
  auto C_ff() { return C.leftCols(in_channels); }
  auto C_rec() { return C.rightCols(cfg.recurrent ? cfg.units : 0); }

  double trace_decay() const { return std::exp(-cfg.dt / cfg.tau_s); }
  double adapt_decay() const { return std::exp(-cfg.dt / cfg.alif_tau); }
  // Membrane decay for the non-gated kinds.
  double fixed_rho() const {
    return cfg.lif_rho ? *cfg.lif_rho : std::exp(-cfg.g_l * cfg.dt);
  }
};

struct Network {
  Index input_channels = 0;
  Index readout_dim = 0;
  SpikeMode spike_mode = SpikeMode::Binary;
  std::uint64_t init_seed = 0;
  std::vector<NetLayer> layers;
  Matrix W_L;  // readout_dim x last_layer_units

  Index output_units() const {
    return layers.empty() ? 0 : layers.back().cfg.units;
  }
  void validate() const;
};

// Builds the topology with zero weights; initialization is separate.
Network make_network(Index input_channels, Index readout_dim,
                     const std::vector<LayerConfig>& layers);

// Per-layer, per-timestep record of everything the backward passes need.
// Column t holds the value at step t+1 (steps are 1-based in the math,
// columns 0-based). d is the shared per-channel trace vector; the per-synapse
// trace matrix of the single-step API equals ones(units) * d^T row for row.
struct LayerCache {
  Matrix d;    // total_in x T
  Matrix rho;  // units x T
  Matrix pre;  // units x T (truncation argument; zero for fixed-decay kinds)
  Matrix V;    // units x T
  Matrix z;    // units x T
  Matrix psi;  // units x T
  Matrix a;    // units x T, ALIF adaptation trace (empty otherwise)
};

struct ForwardCache {
  Matrix input;  // channels x T
  std::vector<LayerCache> layers;
  Matrix o;  // readout_dim x T
  Index T = 0;
};

struct ReadoutResult {
  Matrix o;       // readout_dim x T, o_t = W_L z_L^t
  Vector y_pred;  // mean of o over timesteps
  double loss = 0.0;
};

struct ForwardResult {
  ReadoutResult readout;
  ForwardCache cache;
};

ForwardResult forward(const Network& net, const SpikeTensor& x);

struct LossResult {
  double value = 0.0;
  Vector grad;  // dL/dy_pred
};

// Softmax cross-entropy over the averaged readout.
LossResult cross_entropy(const Vector& y_pred, Index label);

// Argmax with lowest-index tie-break.
inline Index argmax_lowest(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Index predict(const Network& net, const SpikeTensor& x);

double accuracy(const Network& net, const Dataset& ds);

const char* to_string(NeuronKind kind);
const char* to_string(SpikeMode mode);
NeuronKind neuron_kind_from_string(const std::string& s);
SpikeMode spike_mode_from_string(const std::string& s);

}  // namespace dgn
