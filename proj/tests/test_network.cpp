#include <doctest.h>

#include <cmath>

#include "dgn/error.hpp"
#include "dgn/gradcheck.hpp"
#include "dgn/network.hpp"
#include "dgn/rng.hpp"

using namespace dgn;

namespace {

Network single_dgn_layer(Index channels, Index units, Index readout,
                         bool recurrent = false) {
  LayerConfig cfg;
  cfg.kind = NeuronKind::Dgn;
  cfg.units = units;
  cfg.recurrent = recurrent;
  cfg.g_l = 0.2;
  cfg.tau_s = 2.0;
  cfg.theta = 1.0;
  return make_network(channels, readout, {cfg});
}

}  // namespace

TEST_CASE("all-zero input leaves the network silent") {
  Network net = single_dgn_layer(3, 4, 2);
  Rng rng(1);
  for (Index i = 0; i < net.layers[0].W.size(); ++i)
    *(net.layers[0].W.data() + i) = rng.uniform(0.0, 1.0);
  net.W_L = Matrix::Constant(2, 4, 0.5);
  auto fr = forward(net, SpikeTensor::zeros(3, 10));
  CHECK(fr.readout.o.isZero());
  CHECK(fr.readout.y_pred.isZero());
  for (const auto& lc : fr.cache.layers) CHECK(lc.z.isZero());
}

TEST_CASE("hand-computed three-step trajectory and readout") {
  // One LIF unit, one channel: lambda = 0.5, rho = 0.5, W = 3, theta = 1.
  // input [1, 0, 1]:
  //   t1: D = 1,    V = 3                          -> spike
  //   t2: D = 0.5,  V = 1.5 + 1.5 - 1 = 2          -> spike
  //   t3: D = 1.25, V = 1 + 3.75 - 1 = 3.75        -> spike
  LayerConfig cfg;
  cfg.kind = NeuronKind::Lif;
  cfg.units = 1;
  cfg.tau_s = 1.0 / std::log(2.0);
  cfg.lif_rho = 0.5;
  cfg.theta = 1.0;
  Network net = make_network(1, 2, {cfg});
  net.layers[0].W(0, 0) = 3.0;
  net.W_L << 0.3, 0.7;

  Matrix x(1, 3);
  x << 1.0, 0.0, 1.0;
  auto fr = forward(net, SpikeTensor(x));
  const auto& lc = fr.cache.layers[0];
  CHECK(lc.V(0, 0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(lc.V(0, 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(lc.V(0, 2) == doctest::Approx(3.75).epsilon(1e-9));
  CHECK(lc.z.row(0).sum() == 3.0);
  CHECK(fr.readout.y_pred[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fr.readout.y_pred[1] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("cache spans the full horizon for a long input") {
  LayerConfig cfg;
  cfg.kind = NeuronKind::Dgn;
  cfg.units = 16;
  cfg.tau_s = 0.02;  // traces die within a step; still well defined
  Network net = make_network(700, 20, {cfg});
  auto fr = forward(net, SpikeTensor::zeros(700, 250));
  CHECK(fr.cache.T == 250);
  CHECK(fr.cache.layers[0].V.cols() == 250);
  CHECK(fr.cache.layers[0].d.cols() == 250);
  CHECK(fr.cache.o.cols() == 250);
}

TEST_CASE("shape errors are structured") {
  Network net = single_dgn_layer(3, 4, 2);
  CHECK_THROWS_AS(forward(net, SpikeTensor::zeros(5, 4)), Error);
}

TEST_CASE("readout averaging is consistent with the cached outputs") {
  Network net = random_small_net(99, false);
  SpikeTensor x = random_input(net, 99, 7);
  auto fr = forward(net, x);
  Vector recomputed = fr.cache.o.rowwise().mean();
  CHECK((recomputed - fr.readout.y_pred).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward is bit-deterministic") {
  Network net = random_small_net(123, false);
  SpikeTensor x = random_input(net, 7, 9);
  auto a = forward(net, x);
  auto b = forward(net, x);
  CHECK((a.readout.y_pred.array() == b.readout.y_pred.array()).all());
  for (std::size_t l = 0; l < a.cache.layers.size(); ++l) {
    CHECK((a.cache.layers[l].V.array() == b.cache.layers[l].V.array()).all());
    CHECK((a.cache.layers[l].z.array() == b.cache.layers[l].z.array()).all());
  }
}

TEST_CASE("recurrent layer with zero recurrent weights equals feedforward") {
  Network rec_net = single_dgn_layer(3, 4, 2, /*recurrent=*/true);
  Network ff_net = single_dgn_layer(3, 4, 2, /*recurrent=*/false);
  Rng rng(55);
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 3; ++c) {
      const double w = rng.uniform(0.1, 1.5);
      const double g = rng.uniform(0.0, 0.4);
      rec_net.layers[0].W(r, c) = w;
      ff_net.layers[0].W(r, c) = w;
      rec_net.layers[0].C(r, c) = g;
      ff_net.layers[0].C(r, c) = g;
    }
  rec_net.W_L = Matrix::Constant(2, 4, 0.7);
  ff_net.W_L = rec_net.W_L;

  SpikeTensor x = random_input(ff_net, 3, 12);
  auto a = forward(rec_net, x);
  auto b = forward(ff_net, x);
  CHECK((a.cache.layers[0].V.array() == b.cache.layers[0].V.array()).all());
  CHECK((a.readout.y_pred.array() == b.readout.y_pred.array()).all());
}

TEST_CASE("permuting hidden units leaves y_pred unchanged") {
  Network net = random_small_net(2024, false);
  SpikeTensor x = random_input(net, 3, 8);
  const Vector base = forward(net, x).readout.y_pred;

  // Swap units 0 and 1 of the first layer.
  Network perm = net;
  auto& layer = perm.layers[0];
  layer.W.row(0).swap(layer.W.row(1));
  if (layer.has_gate_weights()) layer.C.row(0).swap(layer.C.row(1));
  if (layer.cfg.recurrent) {
    const Index off = layer.in_channels;
    layer.W.col(off + 0).swap(layer.W.col(off + 1));
    if (layer.has_gate_weights())
      layer.C.col(off + 0).swap(layer.C.col(off + 1));
  }
  if (perm.layers.size() > 1) {
    perm.layers[1].W.col(0).swap(perm.layers[1].W.col(1));
    if (perm.layers[1].has_gate_weights())
      perm.layers[1].C.col(0).swap(perm.layers[1].C.col(1));
  } else {
    perm.W_L.col(0).swap(perm.W_L.col(1));
  }
  const Vector permuted = forward(perm, x).readout.y_pred;
  CHECK((base - permuted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cross entropy") {
  SUBCASE("uniform prediction gives ln K") {
    Vector y = Vector::Constant(5, 0.37);
    auto l = cross_entropy(y, 2);
    CHECK(l.value == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  }
  SUBCASE("dominant correct logit beats ln K") {
    Vector y(3);
    y << 0.1, 2.0, 0.1;
    CHECK(cross_entropy(y, 1).value < std::log(3.0));
  }
  SUBCASE("gradient matches central differences") {
    Vector y(4);
    y << 0.3, -0.2, 0.9, 0.05;
    auto l = cross_entropy(y, 3);
    const double h = 1e-6;
    for (Index i = 0; i < 4; ++i) {
      Vector yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      const double fd =
          (cross_entropy(yp, 3).value - cross_entropy(ym, 3).value) / (2 * h);
      CHECK(std::abs(fd - l.grad[i]) < 1e-8);
    }
  }
  SUBCASE("label range checked") {
    CHECK_THROWS_AS(cross_entropy(Vector::Zero(3), 3), Error);
  }
}

TEST_CASE("predict uses lowest-index tie-break") {
  LayerConfig cfg;
  cfg.kind = NeuronKind::Lif;
  cfg.units = 1;
  Network net = make_network(1, 2, {cfg});
  net.layers[0].W(0, 0) = 5.0;

  SUBCASE("clear winner") {
    net.W_L << 0.2, 0.9;
    Matrix x(1, 3);
    x << 1, 1, 1;
    CHECK(predict(net, SpikeTensor(x)) == 1);
  }
  SUBCASE("exact tie goes to class 0") {
    net.W_L << 0.5, 0.5;
    Matrix x(1, 3);
    x << 1, 1, 1;
    CHECK(predict(net, SpikeTensor(x)) == 0);
  }
  SUBCASE("silent network predicts class 0") {
    net.W_L << 0.5, 0.5;
    CHECK(predict(net, SpikeTensor::zeros(1, 3)) == 0);
  }
}
