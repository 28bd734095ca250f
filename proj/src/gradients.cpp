#include "dgn/gradients.hpp"

#include <cmath>
#include <string>

#include "dgn/error.hpp"

namespace dgn {

GradientSet GradientSet::zeros_like(const Network& net) {
  GradientSet g;
  g.layers.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    g.layers[l].dW = Matrix::Zero(layer.W.rows(), layer.W.cols());
    if (layer.has_gate_weights())
      g.layers[l].dC = Matrix::Zero(layer.C.rows(), layer.C.cols());
  }
  g.dW_L = Matrix::Zero(net.W_L.rows(), net.W_L.cols());
  return g;
}

void GradientSet::accumulate(const GradientSet& other) {
  require(layers.size() == other.layers.size(),
          "GradientSet::accumulate: mismatched layer count");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].dW += other.layers[l].dW;
    if (layers[l].dC.size() > 0) layers[l].dC += other.layers[l].dC;
  }
  dW_L += other.dW_L;
}

void GradientSet::scale(double s) {
  for (auto& lg : layers) {
    lg.dW *= s;
    if (lg.dC.size() > 0) lg.dC *= s;
  }
  dW_L *= s;
}

bool GradientSet::all_finite() const {
  for (const auto& lg : layers) {
    if (!lg.dW.allFinite()) return false;
    if (lg.dC.size() > 0 && !lg.dC.allFinite()) return false;
  }
  return dW_L.allFinite();
}

namespace {

void check_cache(const Network& net, const ForwardCache& cache,
                 const Vector& dLdy) {
  require(cache.layers.size() == net.layers.size(),
          "bptt: cache layer count does not match network");
  require(cache.T > 0, "bptt: empty cache");
  require(dLdy.size() == net.readout_dim,
          "bptt: dL/dy_pred size does not match readout dimension");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& lc = cache.layers[l];
    const auto& layer = net.layers[l];
    require(lc.d.rows() == layer.total_in() && lc.d.cols() == cache.T &&
                lc.V.rows() == layer.cfg.units && lc.psi.cols() == cache.T &&
                lc.rho.cols() == cache.T && lc.z.cols() == cache.T,
            "bptt: cache for layer " + std::to_string(l) + " is incomplete");
    if (layer.cfg.kind == NeuronKind::Alif)
      require(lc.a.cols() == cache.T,
              "bptt: ALIF adaptation trace missing from cache for layer " +
                  std::to_string(l));
  }
}

// External credit per timestep for the top layer: dL/do_t = dLdy / T, pulled
// through the readout.
Vector top_credit(const Network& net, const Vector& dLdy, Index T) {
  return net.W_L.transpose() * (dLdy / static_cast<double>(T));
}

Matrix readout_grad(const Network& net, const ForwardCache& cache,
                    const Vector& dLdy) {
  const auto& z_top = cache.layers.back().z;
  return dLdy * (z_top.rowwise().sum().transpose() /
                 static_cast<double>(cache.T));
}

// Single adjoint sweep over one layer. `zeta` is the credit arriving from
// outside the layer (readout and/or the layer above). Emits the adjoint of
// the layer's feedforward input spikes and, when `grads` is set, accumulates
// dW/dC.
void reverse_layer(const NetLayer& layer, const LayerCache& lc,
                   const Matrix& zeta, bool gate_path, LayerGrads* grads,
                   Matrix& gx) {
  const Index T = lc.V.cols();
  const Index U = layer.cfg.units;
  const Index Cin = layer.in_channels;
  const bool gated =
      layer.cfg.kind == NeuronKind::Dgn && layer.cfg.dynamic_gate;
  const bool alif = layer.cfg.kind == NeuronKind::Alif;
  const bool rec = layer.cfg.recurrent;
  const double dt = layer.cfg.dt;
  const double theta = layer.cfg.theta;
  const double lambda = layer.trace_decay();
  const double lambda_a = alif ? layer.adapt_decay() : 0.0;
  const double beta = layer.cfg.alif_beta;

  gx = Matrix::Zero(Cin, T);
  Vector AV = Vector::Zero(U);               // adjoint of V^{t+1}
  Vector AD = Vector::Zero(layer.total_in());  // adjoint of d^{t+1}
  Vector AA = Vector::Zero(U);               // adjoint of a^{t+1}

  for (Index t = T - 1; t >= 0; --t) {
    Vector az = zeta.col(t) - theta * AV;
    if (rec) az += AD.tail(U);
    if (alif) az += AA;

    const Vector psi_az = lc.psi.col(t).cwiseProduct(az);
    Vector av = psi_az;
    if (t + 1 < T) av += lc.rho.col(t + 1).cwiseProduct(AV);

    if (alif) AA = -beta * psi_az + lambda_a * AA;

    if (grads) grads->dW += (dt * av) * lc.d.col(t).transpose();
    Vector ad = dt * (layer.W.transpose() * av);

    if (gated && t > 0) {
      const Vector apre =
          truncation_deriv(layer.cfg.truncation, lc.pre.col(t))
              .cwiseProduct(av.cwiseProduct(lc.V.col(t - 1)));
      if (grads) grads->dC -= (dt * apre) * lc.d.col(t).transpose();
      if (gate_path) ad -= dt * (layer.C.transpose() * apre);
    }

    ad += lambda * AD;
    gx.col(t) = ad.head(Cin);
    AV = av;
    AD = ad;
  }
}

}  // namespace

GradientSet bptt_reverse_mode(const Network& net, const ForwardCache& cache,
                              const Vector& dLdy) {
  check_cache(net, cache, dLdy);
  GradientSet g = GradientSet::zeros_like(net);
  g.dW_L = readout_grad(net, cache, dLdy);

  const Index T = cache.T;
  Matrix zeta = top_credit(net, dLdy, T).replicate(1, T);
  for (auto l = static_cast<Index>(net.layers.size()) - 1; l >= 0; --l) {
    Matrix gx;
    reverse_layer(net.layers[l], cache.layers[l], zeta, /*gate_path=*/true,
                  &g.layers[l], gx);
    zeta = std::move(gx);
  }
  return g;
}

Matrix input_gradient(const Network& net, const ForwardCache& cache,
                      const Vector& dLdy, bool gate_path) {
  check_cache(net, cache, dLdy);
  const Index T = cache.T;
  Matrix zeta = top_credit(net, dLdy, T).replicate(1, T);
  for (auto l = static_cast<Index>(net.layers.size()) - 1; l >= 0; --l) {
    Matrix gx;
    reverse_layer(net.layers[l], cache.layers[l], zeta, gate_path,
                  /*grads=*/nullptr, gx);
    zeta = std::move(gx);
  }
  return zeta;  // channels x T, adjoint of every input element
}

Matrix input_gradient(const Network& net, const SpikeTensor& x, Index label,
                      bool gate_path) {
  auto fr = forward(net, x);
  const auto loss = cross_entropy(fr.readout.y_pred, label);
  return input_gradient(net, fr.cache, loss.grad, gate_path);
}

GradientSet bptt_closed_form(const Network& net, const ForwardCache& cache,
                             const Vector& dLdy) {
  check_cache(net, cache, dLdy);
  GradientSet g = GradientSet::zeros_like(net);
  g.dW_L = readout_grad(net, cache, dLdy);

  const Index T = cache.T;
  Matrix zeta = top_credit(net, dLdy, T).replicate(1, T);

  for (auto li = static_cast<Index>(net.layers.size()) - 1; li >= 0; --li) {
    const NetLayer& layer = net.layers[li];
    const LayerCache& lc = cache.layers[li];
    const Index U = layer.cfg.units;
    const Index Ctot = layer.total_in();
    const Index Cin = layer.in_channels;
    const bool gated =
        layer.cfg.kind == NeuronKind::Dgn && layer.cfg.dynamic_gate;
    const bool alif = layer.cfg.kind == NeuronKind::Alif;
    const bool rec = layer.cfg.recurrent;
    const double dt = layer.cfg.dt;
    const double theta = layer.cfg.theta;
    const double lambda = layer.trace_decay();
    const double lambda_a = alif ? layer.adapt_decay() : 0.0;
    const double beta = layer.cfg.alif_beta;

    // Backward phase: total spike adjoint g_t, membrane adjoint v_t and
    // trace adjoint streams, expanded over the whole horizon.
    Matrix ghat = Matrix::Zero(U, T);
    Matrix vbar = Matrix::Zero(U, T);
    Matrix abar = alif ? Matrix::Zero(U, T) : Matrix();
    Matrix adT = Matrix::Zero(Ctot, T);
    for (Index t = T - 1; t >= 0; --t) {
      Vector gz = zeta.col(t);
      if (t + 1 < T) {
        gz -= theta * vbar.col(t + 1);
        if (rec) gz += adT.col(t + 1).tail(U);
        if (alif) gz += abar.col(t + 1);
      }
      ghat.col(t) = gz;
      const Vector psi_gz = lc.psi.col(t).cwiseProduct(gz);
      vbar.col(t) = psi_gz;
      if (t + 1 < T)
        vbar.col(t) += lc.rho.col(t + 1).cwiseProduct(vbar.col(t + 1));
      if (alif) {
        abar.col(t) = -beta * psi_gz;
        if (t + 1 < T) abar.col(t) += lambda_a * abar.col(t + 1);
      }
      Vector s = dt * (layer.W.transpose() * vbar.col(t));
      if (gated && t > 0) {
        const Vector fpv =
            truncation_deriv(layer.cfg.truncation, lc.pre.col(t))
                .cwiseProduct(lc.V.col(t - 1))
                .cwiseProduct(vbar.col(t));
        s -= dt * (layer.C.transpose() * fpv);
      }
      adT.col(t) = s;
      if (t + 1 < T) adT.col(t) += lambda * adT.col(t + 1);
    }

    // Forward phase: accumulate the membrane Jacobian chains
    //   P_t[u, i] = rho_u^t P_{t-1}[u, i] + dt d_i^t
    //   Q_t[u, i] = rho_u^t Q_{t-1}[u, i] - f'_u^t V_u^{t-1} dt d_i^t
    // and fold them into the gradients with the credit g_t psi_t.
    Matrix P = Matrix::Zero(U, Ctot);
    Matrix Q = gated ? Matrix::Zero(U, Ctot) : Matrix();
    for (Index t = 0; t < T; ++t) {
      P.array().colwise() *= lc.rho.col(t).array();
      P.noalias() +=
          Vector::Ones(U) * (dt * lc.d.col(t).transpose());
      if (gated) {
        Q.array().colwise() *= lc.rho.col(t).array();
        if (t > 0) {
          const Vector fpv =
              truncation_deriv(layer.cfg.truncation, lc.pre.col(t))
                  .cwiseProduct(lc.V.col(t - 1));
          Q.noalias() -= fpv * (dt * lc.d.col(t).transpose());
        }
      }
      const Vector credit = ghat.col(t).cwiseProduct(lc.psi.col(t));
      g.layers[li].dW.noalias() += credit.asDiagonal() * P;
      if (gated) g.layers[li].dC.noalias() += credit.asDiagonal() * Q;
    }

    zeta = adT.topRows(Cin);
  }
  return g;
}

GradDiff compare_gradients(const GradientSet& a, const GradientSet& b) {
  require(a.layers.size() == b.layers.size(),
          "compare_gradients: mismatched layer count");
  GradDiff out;
  auto consider = [&](const Matrix& x, const Matrix& y,
                      const std::string& name) {
    require(x.rows() == y.rows() && x.cols() == y.cols(),
            "compare_gradients: shape mismatch for " + name);
    if (x.size() == 0) return;
    const double scale =
        std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
    const double err =
        (x - y).cwiseAbs().maxCoeff() / std::max(scale, 1e-12);
    if (err > out.max_rel_err) {
      out.max_rel_err = err;
      out.worst = name;
    }
  };
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    consider(a.layers[l].dW, b.layers[l].dW,
             "layer " + std::to_string(l) + " dW");
    consider(a.layers[l].dC, b.layers[l].dC,
             "layer " + std::to_string(l) + " dC");
  }
  consider(a.dW_L, b.dW_L, "readout dW_L");
  return out;
}

}  // namespace dgn
