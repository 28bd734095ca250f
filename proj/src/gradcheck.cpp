#include "dgn/gradcheck.hpp"

#include <algorithm>

#include "dgn/gradients.hpp"
#include "dgn/rng.hpp"

namespace dgn {

Network random_small_net(std::uint64_t seed, bool smoothed,
                         std::optional<bool> force_recurrent) {
  Rng rng = derive_stream(seed, 0x6E657473ULL);  // "nets"
  const Index channels = 2 + static_cast<Index>(rng.below(5));
  const Index readout = 2 + static_cast<Index>(rng.below(2));
  const int n_layers = 1 + static_cast<int>(rng.below(2));

  std::vector<LayerConfig> layers;
  for (int l = 0; l < n_layers; ++l) {
    LayerConfig cfg;
    const double kind_draw = rng.uniform01();
    if (smoothed || kind_draw < 0.7)
      cfg.kind = NeuronKind::Dgn;
    else if (kind_draw < 0.85)
      cfg.kind = NeuronKind::Lif;
    else
      cfg.kind = NeuronKind::Alif;
    cfg.units = 2 + static_cast<Index>(rng.below(7));
    cfg.recurrent =
        force_recurrent ? *force_recurrent : rng.bernoulli(0.5);
    cfg.g_l = rng.uniform(0.2, 1.0);
    cfg.tau_s = rng.uniform(0.8, 3.0);
    cfg.dt = 1.0;
    cfg.theta = rng.uniform(0.5, 1.2);
    if (smoothed) {
      cfg.truncation = Truncation::Sigmoid;
      cfg.surrogate.kind = SurrogateKind::SigmoidDerivative;
      cfg.surrogate.width = rng.uniform(0.8, 1.2);
    } else {
      cfg.truncation =
          rng.bernoulli(0.5) ? Truncation::Sigmoid : Truncation::HardClamp01;
      const auto sk = rng.below(4);
      cfg.surrogate.kind = static_cast<SurrogateKind>(sk);
      cfg.surrogate.width = rng.uniform(0.8, 1.6);
    }
    if (cfg.kind == NeuronKind::Alif) {
      cfg.alif_beta = rng.uniform(0.1, 0.5);
      cfg.alif_tau = rng.uniform(1.0, 3.0);
    }
    layers.push_back(cfg);
  }

  Network net = make_network(channels, readout, layers);
  if (smoothed) net.spike_mode = SpikeMode::SurrogatePrimal;
  for (auto& layer : net.layers) {
    for (Index r = 0; r < layer.W.rows(); ++r)
      for (Index c = 0; c < layer.W.cols(); ++c)
        layer.W(r, c) = rng.uniform(-0.7, 0.9);
    if (layer.has_gate_weights())
      for (Index r = 0; r < layer.C.rows(); ++r)
        for (Index c = 0; c < layer.C.cols(); ++c)
          layer.C(r, c) = rng.uniform(-0.3, 0.5);
  }
  for (Index r = 0; r < net.W_L.rows(); ++r)
    for (Index c = 0; c < net.W_L.cols(); ++c)
      net.W_L(r, c) = rng.uniform(-1.0, 1.0);
  return net;
}

SpikeTensor random_input(const Network& net, std::uint64_t seed, Index T) {
  Rng rng = derive_stream(seed, 0x696E7075ULL);  // "inpu"
  Matrix m = Matrix::Zero(net.input_channels, T);
  for (Index t = 0; t < T; ++t)
    for (Index c = 0; c < net.input_channels; ++c)
      if (rng.bernoulli(0.35))
        m(c, t) = 1.0 + static_cast<double>(rng.below(2));
  return SpikeTensor(std::move(m));
}

GradcheckReport run_gradcheck(const GradcheckOptions& opts) {
  GradcheckReport rep;
  rep.nets = opts.nets;
  rep.fd_nets = opts.fd_nets;

  for (int i = 0; i < opts.nets; ++i) {
    // Keep both wirings represented regardless of the draw.
    std::optional<bool> wiring;
    if (i == 0) wiring = false;
    if (i == 1) wiring = true;
    const std::uint64_t net_seed = opts.seed + static_cast<std::uint64_t>(i);
    Network net = random_small_net(net_seed, /*smoothed=*/false, wiring);
    Rng rng = derive_stream(net_seed, 0x54ULL);
    const Index T = 3 + static_cast<Index>(rng.below(8));
    const SpikeTensor x = random_input(net, net_seed, T);
    const auto label = static_cast<Index>(rng.below(net.readout_dim));

    auto fr = forward(net, x);
    const auto loss = cross_entropy(fr.readout.y_pred, label);
    const GradientSet a = bptt_closed_form(net, fr.cache, loss.grad);
    const GradientSet b = bptt_reverse_mode(net, fr.cache, loss.grad);
    const GradDiff diff = compare_gradients(a, b);
    if (!diff.worst.empty()) {
      auto& slot = rep.per_tensor_worst[diff.worst];
      slot = std::max(slot, diff.max_rel_err);
    }
    if (diff.max_rel_err > rep.max_dual_err) {
      rep.max_dual_err = diff.max_rel_err;
      rep.worst_dual = diff.worst + " (net " + std::to_string(i) + ")";
    }
  }

  for (int i = 0; i < opts.fd_nets; ++i) {
    const std::uint64_t net_seed =
        opts.seed + 1000 + static_cast<std::uint64_t>(i);
    Network net = random_small_net(net_seed, /*smoothed=*/true);
    Rng rng = derive_stream(net_seed, 0x54ULL);
    const Index T = 4 + static_cast<Index>(rng.below(5));
    const SpikeTensor x = random_input(net, net_seed, T);
    const auto label = static_cast<Index>(rng.below(net.readout_dim));

    auto fr = forward(net, x);
    const auto loss = cross_entropy(fr.readout.y_pred, label);
    const GradientSet analytic = bptt_reverse_mode(net, fr.cache, loss.grad);
    const GradientSet fd = finite_difference_grad(net, x, label, opts.fd_h);
    const GradDiff diff = compare_gradients(analytic, fd);
    if (diff.max_rel_err > rep.max_fd_err) {
      rep.max_fd_err = diff.max_rel_err;
      rep.worst_fd = diff.worst + " (net " + std::to_string(i) + ")";
    }
  }

  rep.pass = rep.max_dual_err <= opts.tol_dual && rep.max_fd_err <= opts.tol_fd;
  return rep;
}

}  // namespace dgn
