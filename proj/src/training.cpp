#include "dgn/training.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dgn/error.hpp"

namespace dgn {

AdamState AdamState::zeros_like(const Network& net) {
  AdamState st;
  st.layer_W.resize(net.layers.size());
  st.layer_C.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    st.layer_W[l].m = Matrix::Zero(layer.W.rows(), layer.W.cols());
    st.layer_W[l].v = Matrix::Zero(layer.W.rows(), layer.W.cols());
    if (layer.has_gate_weights()) {
      st.layer_C[l].m = Matrix::Zero(layer.C.rows(), layer.C.cols());
      st.layer_C[l].v = Matrix::Zero(layer.C.rows(), layer.C.cols());
    }
  }
  st.readout.m = Matrix::Zero(net.W_L.rows(), net.W_L.cols());
  st.readout.v = Matrix::Zero(net.W_L.rows(), net.W_L.cols());
  return st;
}

void adam_step(Network& net, const GradientSet& grads, AdamState& st,
               const AdamConfig& cfg) {
  require(grads.layers.size() == net.layers.size(),
          "adam_step: gradient layer count does not match network");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));

  auto update = [&](Matrix& p, const Matrix& g, AdamState::Moments& mom) {
    mom.m = cfg.beta1 * mom.m + (1.0 - cfg.beta1) * g;
    mom.v = cfg.beta2 * mom.v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    p.array() -= cfg.lr * (mom.m.array() / bc1) /
                 ((mom.v.array() / bc2).sqrt() + cfg.epsilon);
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].W, grads.layers[l].dW, st.layer_W[l]);
    if (net.layers[l].has_gate_weights())
      update(net.layers[l].C, grads.layers[l].dC, st.layer_C[l]);
  }
  update(net.W_L, grads.dW_L, st.readout);
}

namespace {

void fill_uniform_rowmajor(Matrix& m, double center, double delta, Rng& rng) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = rng.uniform(center - delta, center + delta);
}

}  // namespace

std::pair<Matrix, Matrix> init_weight_pair(Index rows, Index cols,
                                           const InitSpec& spec, Rng& rng) {
  require(spec.c_delta >= 0.0 && spec.w_delta >= 0.0,
          "init_weight_pair: range widths must be nonnegative");
  Matrix W(rows, cols), C(rows, cols);
  fill_uniform_rowmajor(W, spec.w, spec.w_delta, rng);
  fill_uniform_rowmajor(C, spec.c, spec.c_delta, rng);
  return {std::move(W), std::move(C)};
}

void init_weights(Network& net, const InitSpec& spec, Rng& rng) {
  require(spec.c_delta >= 0.0 && spec.w_delta >= 0.0,
          "init_weights: range widths must be nonnegative");
  for (auto& layer : net.layers) {
    fill_uniform_rowmajor(layer.W, spec.w, spec.w_delta, rng);
    if (layer.has_gate_weights())
      fill_uniform_rowmajor(layer.C, spec.c, spec.c_delta, rng);
  }
  fill_uniform_rowmajor(net.W_L, spec.w, spec.w_delta, rng);
}

History train(Network& net, const Dataset& train_set, const Dataset* eval_set,
              const TrainConfig& cfg) {
  require(!train_set.empty(), "train: empty dataset");
  require(cfg.epochs >= 1, "train: epochs must be >= 1");
  require(cfg.batch_size >= 1, "train: batch_size must be >= 1");

  if (cfg.initialize) {
    Rng init_rng = derive_stream(cfg.seed, 0);
    init_weights(net, cfg.init, init_rng);
    net.init_seed = cfg.seed;
  }
  Rng shuffle_rng = derive_stream(cfg.seed, 1);

  AdamState st = AdamState::zeros_like(net);
  AdamConfig adam = cfg.adam;
  adam.lr = cfg.lr;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const auto N = static_cast<double>(train_set.size());
  History hist;
  hist.reserve(cfg.epochs);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(order);
    double total_loss = 0.0;
    Index correct = 0;
    const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(start + batch_size, order.size());
      GradientSet batch = GradientSet::zeros_like(net);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train_set[order[i]];
        auto fr = forward(net, s.x);
        auto loss = cross_entropy(fr.readout.y_pred, s.label);
        if (!std::isfinite(loss.value))
          fail("train: non-finite loss at epoch " + std::to_string(epoch) +
               ", batch starting at index " + std::to_string(start));
        total_loss += loss.value;
        if (argmax_lowest(fr.readout.y_pred) == s.label) ++correct;
        batch.accumulate(bptt_reverse_mode(net, fr.cache, loss.grad));
      }
      batch.scale(1.0 / static_cast<double>(end - start));
      adam_step(net, batch, st, adam);
    }
    EpochStats es;
    es.epoch = epoch;
    es.train_loss = total_loss / N;
    es.train_acc = static_cast<double>(correct) / N;
    es.eval_acc = (eval_set && !eval_set->empty())
                      ? accuracy(net, *eval_set)
                      : std::numeric_limits<double>::quiet_NaN();
    hist.push_back(es);
  }
  return hist;
}

GradientSet finite_difference_grad(const Network& net, const SpikeTensor& x,
                                   Index label, double h) {
  require(h >= 1e-6 && h <= 1e-4,
          "finite_difference_grad: h must lie in [1e-6, 1e-4]");
  require(net.spike_mode == SpikeMode::SurrogatePrimal,
          "finite_difference_grad: requires a smoothed network "
          "(spike_mode = surrogate_primal)");

  Network work = net;
  auto eval = [&]() {
    auto fr = forward(work, x);
    auto loss = cross_entropy(fr.readout.y_pred, label);
    require(std::isfinite(loss.value),
            "finite_difference_grad: non-finite loss");
    return loss.value;
  };

  GradientSet g = GradientSet::zeros_like(net);
  auto fd_tensor = [&](Matrix& param, Matrix& grad) {
    for (Index j = 0; j < param.size(); ++j) {
      double& p = *(param.data() + j);
      const double orig = p;
      p = orig + h;
      const double fp = eval();
      p = orig - h;
      const double fm = eval();
      p = orig;
      *(grad.data() + j) = (fp - fm) / (2.0 * h);
    }
  };

  for (std::size_t l = 0; l < work.layers.size(); ++l) {
    fd_tensor(work.layers[l].W, g.layers[l].dW);
    if (work.layers[l].has_gate_weights())
      fd_tensor(work.layers[l].C, g.layers[l].dC);
  }
  fd_tensor(work.W_L, g.dW_L);
  return g;
}

}  // namespace dgn
