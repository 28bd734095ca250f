#pragma once

#include <cstdint>
#include <vector>

#include "dgn/gradients.hpp"
#include "dgn/network.hpp"
#include "dgn/rng.hpp"

namespace dgn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  struct Moments {
    Matrix m;
    Matrix v;
  };
  std::vector<Moments> layer_W;
  std::vector<Moments> layer_C;
  Moments readout;
  long step = 0;

  static AdamState zeros_like(const Network& net);
};

// Standard bias-corrected Adam applied tensor by tensor.
void adam_step(Network& net, const GradientSet& grads, AdamState& state,
               const AdamConfig& cfg);

// Uniform init: C ~ U[c - c_delta, c + c_delta], W ~ U[w - w_delta, w + w_delta].
// Draw order (fixed for reproducibility): per layer W then C, row-major,
// feedforward block then recurrent block; the readout uses the W range last.
struct InitSpec {
  double c = 0.01;
  double c_delta = 0.005;
  double w = 0.01;
  double w_delta = 0.005;
};

// Draws one (W, C) pair for the given shape: W first then C, each row-major.
std::pair<Matrix, Matrix> init_weight_pair(Index rows, Index cols,
                                           const InitSpec& spec, Rng& rng);

void init_weights(Network& net, const InitSpec& spec, Rng& rng);

struct TrainConfig {
  int epochs = 50;
  double lr = 1e-3;
  int batch_size = 16;
  std::uint64_t seed = 0;
  bool shuffle = true;
  InitSpec init;
  bool initialize = true;  // draw fresh weights from `init` before training
  AdamConfig adam;         // lr is taken from `lr`
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double eval_acc = 0.0;  // NaN when no eval set was given
};

using History = std::vector<EpochStats>;

// Shuffled minibatch loop; batch gradient is the mean over samples, reduced
// in sample order so results are bit-reproducible. Aborts with a diagnostic
// on non-finite loss.
History train(Network& net, const Dataset& train_set, const Dataset* eval_set,
              const TrainConfig& cfg);

// Central differences over every parameter of a smoothed network
// (spike_mode == SurrogatePrimal required); h in [1e-6, 1e-4].
GradientSet finite_difference_grad(const Network& net, const SpikeTensor& x,
                                   Index label, double h);

}  // namespace dgn
