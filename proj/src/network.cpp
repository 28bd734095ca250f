#include "dgn/network.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dgn/error.hpp"

namespace dgn {

void Network::validate() const {
  require(input_channels > 0, "Network: input_channels must be > 0");
  require(readout_dim > 0, "Network: readout_dim must be > 0");
  require(!layers.empty(), "Network: at least one layer required");
  Index expect = input_channels;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string tag = "Network layer " + std::to_string(l);
    require(layer.cfg.units > 0, tag + ": units must be > 0");
    require(layer.in_channels == expect,
            tag + ": expects " + std::to_string(layer.in_channels) +
                " input channels, previous stage provides " +
                std::to_string(expect));
    require(layer.W.rows() == layer.cfg.units &&
                layer.W.cols() == layer.total_in(),
            tag + ": W shape mismatch");
    if (layer.has_gate_weights())
      require(layer.C.rows() == layer.W.rows() &&
                  layer.C.cols() == layer.W.cols(),
              tag + ": C shape mismatch");
    require(layer.cfg.g_l > 0.0 && layer.cfg.tau_s > 0.0 &&
                layer.cfg.dt > 0.0 && layer.cfg.theta > 0.0,
            tag + ": g_l, tau_s, dt, theta must be > 0");
    expect = layer.cfg.units;
  }
  require(W_L.rows() == readout_dim && W_L.cols() == expect,
          "Network: readout weights must be readout_dim x last_layer_units");
}

Network make_network(Index input_channels, Index readout_dim,
                     const std::vector<LayerConfig>& layers) {
  Network net;
  net.input_channels = input_channels;
  net.readout_dim = readout_dim;
  Index in = input_channels;
  for (const auto& cfg : layers) {
    NetLayer layer;
    layer.cfg = cfg;
    layer.in_channels = in;
    const Index cols = layer.total_in();
    layer.W = Matrix::Zero(cfg.units, cols);
    if (cfg.kind == NeuronKind::Dgn) layer.C = Matrix::Zero(cfg.units, cols);
    net.layers.push_back(std::move(layer));
    in = cfg.units;
  }
  net.W_L = Matrix::Zero(readout_dim, in);
  net.validate();
  return net;
}

namespace {

double spike_of(SpikeMode mode, const SurrogateSpec& surrogate, double v,
                double theta_eff) {
  if (mode == SpikeMode::Binary) return v >= theta_eff ? 1.0 : 0.0;
  return surrogate_primal(surrogate, v - theta_eff);
}

}  // namespace

ForwardResult forward(const Network& net, const SpikeTensor& x) {
  net.validate();
  require(x.channels() == net.input_channels,
          "forward: input has " + std::to_string(x.channels()) +
              " channels, network expects " +
              std::to_string(net.input_channels));
  const Index T = x.timesteps();
  require(T > 0, "forward: input has no timesteps");

  ForwardResult out;
  ForwardCache& cache = out.cache;
  cache.input = x.values;
  cache.T = T;
  cache.layers.resize(net.layers.size());

  Matrix prev_z = x.values;  // spikes feeding the current layer, channels x T
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const NetLayer& layer = net.layers[l];
    const Index U = layer.cfg.units;
    const Index Ctot = layer.total_in();
    const bool gated = layer.cfg.kind == NeuronKind::Dgn;
    const bool alif = layer.cfg.kind == NeuronKind::Alif;
    const double lambda = layer.trace_decay();
    const double dt = layer.cfg.dt;
    const double theta = layer.cfg.theta;

    LayerCache& lc = cache.layers[l];
    lc.d = Matrix::Zero(Ctot, T);
    lc.rho = Matrix::Zero(U, T);
    lc.pre = Matrix::Zero(U, T);
    lc.V = Matrix::Zero(U, T);
    lc.z = Matrix::Zero(U, T);
    lc.psi = Matrix::Zero(U, T);
    if (alif) lc.a = Matrix::Zero(U, T);

    Vector d = Vector::Zero(Ctot);
    Vector V = Vector::Zero(U);
    Vector z_prev = Vector::Zero(U);
    Vector a = Vector::Zero(U);
    const double fixed_rho = gated ? 0.0 : layer.fixed_rho();
    const double lambda_a = alif ? layer.adapt_decay() : 0.0;

    for (Index t = 0; t < T; ++t) {
      d.head(layer.in_channels) =
          lambda * d.head(layer.in_channels) + prev_z.col(t);
      if (layer.cfg.recurrent)
        d.tail(U) = lambda * d.tail(U) + z_prev;

      Vector rho;
      if (gated) {
        Vector pre = Vector::Constant(U, 1.0);
        if (layer.cfg.static_gate) pre.array() -= layer.cfg.g_l * dt;
        if (layer.cfg.dynamic_gate) pre -= dt * (layer.C * d);
        rho = truncation_value(layer.cfg.truncation, pre);
        lc.pre.col(t) = pre;
      } else {
        rho = Vector::Constant(U, fixed_rho);
      }

      V = rho.cwiseProduct(V) + dt * (layer.W * d) - theta * z_prev;
      if (!V.allFinite())
        fail("forward: non-finite membrane potential in layer " +
             std::to_string(l) + " at timestep " + std::to_string(t + 1));

      Vector theta_eff = Vector::Constant(U, theta);
      if (alif) {
        a = lambda_a * a + z_prev;
        theta_eff += layer.cfg.alif_beta * a;
        lc.a.col(t) = a;
      }

      Vector z(U), psi(U);
      for (Index u = 0; u < U; ++u) {
        z[u] = spike_of(net.spike_mode, layer.cfg.surrogate, V[u],
                        theta_eff[u]);
        psi[u] = surrogate_value(layer.cfg.surrogate, V[u] - theta_eff[u]);
      }

      lc.d.col(t) = d;
      lc.rho.col(t) = rho;
      lc.V.col(t) = V;
      lc.z.col(t) = z;
      lc.psi.col(t) = psi;
      z_prev = z;
    }
    prev_z = lc.z;
  }

  cache.o = net.W_L * prev_z;
  out.readout.o = cache.o;
  out.readout.y_pred = cache.o.rowwise().mean();
  return out;
}

LossResult cross_entropy(const Vector& y_pred, Index label) {
  require(label >= 0 && label < y_pred.size(),
          "cross_entropy: label " + std::to_string(label) +
              " out of range for " + std::to_string(y_pred.size()) +
              " classes");
  const double m = y_pred.maxCoeff();
  const Vector shifted = (y_pred.array() - m).matrix();
  const Vector expv = shifted.array().exp().matrix();
  const double Z = expv.sum();
  LossResult out;
  out.value = std::log(Z) - shifted[label];
  out.grad = expv / Z;
  out.grad[label] -= 1.0;
  return out;
}

Index predict(const Network& net, const SpikeTensor& x) {
  const Vector y = forward(net, x).readout.y_pred;
  Index best = 0;
  for (Index i = 1; i < y.size(); ++i)
    if (y[i] > y[best]) best = i;
  return best;
}

double accuracy(const Network& net, const Dataset& ds) {
  require(!ds.empty(), "accuracy: empty dataset");
  Index correct = 0;
  for (const auto& s : ds)
    if (predict(net, s.x) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

const char* to_string(NeuronKind kind) {
  switch (kind) {
    case NeuronKind::Dgn: return "dgn";
    case NeuronKind::Lif: return "lif";
    case NeuronKind::Alif: return "alif";
  }
  fail("unknown neuron kind");
}

const char* to_string(SpikeMode mode) {
  switch (mode) {
    case SpikeMode::Binary: return "binary";
    case SpikeMode::SurrogatePrimal: return "surrogate_primal";
  }
  fail("unknown spike mode");
}

NeuronKind neuron_kind_from_string(const std::string& s) {
  if (s == "dgn") return NeuronKind::Dgn;
  if (s == "lif") return NeuronKind::Lif;
  if (s == "alif") return NeuronKind::Alif;
  fail("unknown neuron kind: '" + s + "'");
}

SpikeMode spike_mode_from_string(const std::string& s) {
  if (s == "binary") return SpikeMode::Binary;
  if (s == "surrogate_primal") return SpikeMode::SurrogatePrimal;
  fail("unknown spike mode: '" + s + "'");
}

}  // namespace dgn
