#include <doctest.h>

#include <cmath>

#include "dgn/error.hpp"
#include "dgn/neuron.hpp"
#include "dgn/rng.hpp"

using namespace dgn;

namespace {

DgnLayerParams small_params(Index units, Index channels) {
  DgnLayerParams p;
  p.W = Matrix::Constant(units, channels, 0.5);
  p.C = Matrix::Constant(units, channels, 0.1);
  p.g_l = 0.1;
  p.tau_s = 2.0;
  p.dt = 1.0;
  p.theta = 1.0;
  return p;
}

}  // namespace

TEST_CASE("synapse_trace_step analytic values") {
  DgnLayerParams p = small_params(1, 1);
  p.dt = std::log(2.0);
  p.tau_s = 1.0;  // dt/tau_s = ln 2 -> decay 0.5

  SUBCASE("zero fixed point") {
    Matrix D = synapse_trace_step(Matrix::Zero(1, 1), Vector::Zero(1), p);
    CHECK(D(0, 0) == 0.0);
  }
  SUBCASE("pure exponential decay") {
    Matrix D = synapse_trace_step(Matrix::Constant(1, 1, 1.0),
                                  Vector::Zero(1), p);
    CHECK(D(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("decay plus arrival") {
    Matrix D = synapse_trace_step(Matrix::Constant(1, 1, 0.5),
                                  Vector::Ones(1), p);
    CHECK(D(0, 0) == doctest::Approx(1.25).epsilon(1e-15));
  }
  SUBCASE("shape mismatch rejected") {
    CHECK_THROWS_AS(synapse_trace_step(Matrix::Zero(2, 2), Vector::Zero(2), p),
                    Error);
  }
}

TEST_CASE("trace update is linear: superposition to 1e-12") {
  DgnLayerParams p = small_params(3, 4);
  Rng rng(11);
  auto rand_mat = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-1.0, 2.0);
    return m;
  };
  Matrix D1 = rand_mat(3, 4), D2 = rand_mat(3, 4);
  Vector z1 = rand_mat(4, 1), z2 = rand_mat(4, 1);
  const double a = 1.7, b = -0.4;
  Matrix lhs = synapse_trace_step(a * D1 + b * D2,
                                  Vector(a * z1 + b * z2), p);
  Matrix rhs = a * synapse_trace_step(D1, z1, p) +
               b * synapse_trace_step(D2, z2, p);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decay_factor") {
  SUBCASE("dynamic gate off, hard clamp: rho constant 0.9") {
    DgnLayerParams p = small_params(2, 3);
    p.dynamic_gate_enabled = false;
    p.truncation = Truncation::HardClamp01;
    p.g_l = 0.1;
    p.dt = 1.0;
    Matrix D = Matrix::Constant(2, 3, 5.0);  // must be ignored
    auto out = decay_factor(D, p);
    CHECK(out.rho[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(out.rho[1] == doctest::Approx(0.9).epsilon(1e-15));
  }
  SUBCASE("sigmoid at zero pre-activation") {
    DgnLayerParams p = small_params(1, 1);
    p.g_l = 1.0;
    p.dt = 1.0;
    p.C = Matrix::Zero(1, 1);
    auto out = decay_factor(Matrix::Zero(1, 1), p);
    CHECK(out.pre_activation[0] == 0.0);
    CHECK(out.rho[0] == doctest::Approx(0.5));
  }
  SUBCASE("static gate off removes the leak term") {
    DgnLayerParams p = small_params(1, 1);
    p.static_gate_enabled = false;
    p.C = Matrix::Zero(1, 1);
    auto out = decay_factor(Matrix::Zero(1, 1), p);
    CHECK(out.pre_activation[0] == 1.0);
  }
}

TEST_CASE("membrane_step hand values") {
  DgnLayerParams p = small_params(1, 1);
  SUBCASE("all zero") {
    Vector V = membrane_step(Vector::Zero(1), Vector::Constant(1, 0.9),
                             Matrix::Zero(1, 1), Vector::Zero(1), p);
    CHECK(V[0] == 0.0);
  }
  SUBCASE("decay + drive + reset") {
    // V = 0.9 * 1 + 0.2 - 1 * 1 = 0.1
    p.W = Matrix::Constant(1, 1, 0.2);
    p.dt = 1.0;
    p.theta = 1.0;
    Vector V = membrane_step(Vector::Ones(1), Vector::Constant(1, 0.9),
                             Matrix::Ones(1, 1), Vector::Ones(1), p);
    CHECK(V[0] == doctest::Approx(0.1).epsilon(1e-14));
  }
  SUBCASE("pure reset term gives -theta") {
    p.W = Matrix::Zero(1, 1);
    Vector V = membrane_step(Vector::Zero(1), Vector::Constant(1, 0.5),
                             Matrix::Ones(1, 1), Vector::Ones(1), p);
    CHECK(V[0] == -p.theta);
  }
}

TEST_CASE("reset subtracts exactly theta regardless of other terms") {
  DgnLayerParams p = small_params(1, 2);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    p.theta = rng.uniform(0.2, 2.0);
    Vector V0 = Vector::Constant(1, rng.uniform(-1.0, 2.0));
    Vector rho = Vector::Constant(1, rng.uniform(0.0, 1.0));
    Matrix D = Matrix::Constant(1, 2, rng.uniform(0.0, 3.0));
    Vector with = membrane_step(V0, rho, D, Vector::Ones(1), p);
    Vector without = membrane_step(V0, rho, D, Vector::Zero(1), p);
    CHECK(without[0] - with[0] ==
          doctest::Approx(p.theta).epsilon(1e-14));
  }
}

TEST_CASE("fire: threshold convention and surrogate") {
  DgnLayerParams p = small_params(1, 1);
  p.theta = 1.0;
  p.surrogate = {SurrogateKind::Rectangular, 1.0};
  SUBCASE("exact threshold fires") {
    auto out = fire(Vector::Ones(1), p);
    CHECK(out.z[0] == 1.0);
  }
  SUBCASE("just below does not fire but psi > 0") {
    auto out = fire(Vector::Constant(1, 1.0 - 1e-9), p);
    CHECK(out.z[0] == 0.0);
    CHECK(out.psi[0] > 0.0);
  }
  SUBCASE("rectangular psi closed form") {
    auto inside = fire(Vector::Constant(1, 1.4), p);
    CHECK(inside.psi[0] == doctest::Approx(1.0));
    auto outside = fire(Vector::Constant(1, 1.6), p);
    CHECK(outside.psi[0] == 0.0);
  }
}

TEST_CASE("dgn_step composite behaviour") {
  SUBCASE("all-zero state stays silent, rho = phi(1 - g_l dt)") {
    DgnLayerParams p = small_params(2, 2);
    auto [next, rec] = dgn_step(NeuronLayerState::zero(2, 2),
                                Vector::Zero(2), p);
    CHECK(rec.z.isZero());
    CHECK(rec.V.isZero());
    const double expect =
        truncation_value(p.truncation, 1.0 - p.g_l * p.dt);
    CHECK(rec.rho[0] == doctest::Approx(expect));
  }
  SUBCASE("constant drive eventually fires") {
    DgnLayerParams p = small_params(1, 1);
    p.tau_s = 1.0;
    p.theta = 1.0;
    p.g_l = 0.01;
    NeuronLayerState s = NeuronLayerState::zero(1, 1);
    int spikes = 0;
    for (int t = 0; t < 50; ++t) {
      auto [next, rec] = dgn_step(s, Vector::Ones(1), p);
      s = next;
      spikes += static_cast<int>(rec.z[0]);
    }
    CHECK(spikes >= 1);
  }
}

TEST_CASE("gate-off DGN reproduces LIF bit for bit") {
  DgnLayerParams dgn = small_params(3, 2);
  dgn.dynamic_gate_enabled = false;
  dgn.truncation = Truncation::HardClamp01;
  dgn.g_l = 0.25;
  dgn.W = Matrix::Constant(3, 2, 0.8);

  LifLayerParams lif;
  lif.W = dgn.W;
  lif.g_l = dgn.g_l;
  lif.tau_s = dgn.tau_s;
  lif.dt = dgn.dt;
  lif.theta = dgn.theta;
  lif.surrogate = dgn.surrogate;
  lif.rho_m = truncation_value(Truncation::HardClamp01, 1.0 - dgn.g_l * dgn.dt);

  NeuronLayerState sa = NeuronLayerState::zero(3, 2);
  NeuronLayerState sb = NeuronLayerState::zero(3, 2);
  Rng rng(17);
  for (int t = 0; t < 40; ++t) {
    Vector z(2);
    z << (rng.bernoulli(0.5) ? 1.0 : 0.0), (rng.bernoulli(0.3) ? 2.0 : 0.0);
    auto [na, ra] = dgn_step(sa, z, dgn);
    auto [nb, rb] = lif_step(sb, z, lif);
    sa = na;
    sb = nb;
    CHECK((ra.V.array() == rb.V.array()).all());
    CHECK((ra.z.array() == rb.z.array()).all());
    CHECK((ra.D.array() == rb.D.array()).all());
  }
}

TEST_CASE("lif_step") {
  LifLayerParams p;
  p.W = Matrix::Zero(1, 1);
  p.g_l = 0.1;
  p.dt = 1.0;

  SUBCASE("decay constant e^{-0.1}") {
    CHECK(p.decay() == doctest::Approx(0.9048374180359595).epsilon(1e-15));
  }
  SUBCASE("geometric decay over silent steps") {
    NeuronLayerState s = NeuronLayerState::zero(1, 1);
    s.V[0] = 0.7;  // subthreshold, stays silent
    const int T = 12;
    NeuronLayerState cur = s;
    for (int t = 0; t < T; ++t) cur = lif_step(cur, Vector::Zero(1), p).first;
    CHECK(cur.V[0] ==
          doctest::Approx(0.7 * std::pow(p.decay(), T)).epsilon(1e-12));
  }
  SUBCASE("exp vs truncated-linear decay differ at second order") {
    // One silent step from V0: |e^{-x} - (1-x)| <= x^2/2 for x >= 0.
    const double x = p.g_l * p.dt;
    LifLayerParams lin = p;
    lin.rho_m = 1.0 - x;
    NeuronLayerState s = NeuronLayerState::zero(1, 1);
    s.V[0] = 0.9;
    const int T = 20;
    NeuronLayerState a = s, b = s;
    for (int t = 0; t < T; ++t) {
      a = lif_step(a, Vector::Zero(1), p).first;
      b = lif_step(b, Vector::Zero(1), lin).first;
    }
    // Per-step deviation compounds at most T * x^2/2 on a |V| <= 0.9 orbit.
    CHECK(std::abs(a.V[0] - b.V[0]) <= T * x * x / 2.0 * 0.9 + 1e-15);
  }
}

TEST_CASE("alif_step") {
  AlifLayerParams p;
  p.lif.W = Matrix::Constant(1, 1, 2.0);
  p.lif.g_l = 0.2;
  p.lif.theta = 1.0;
  p.beta = 0.5;
  p.tau_adapt = 3.0;

  SUBCASE("beta = 0 is exactly LIF") {
    AlifLayerParams zero_beta = p;
    zero_beta.beta = 0.0;
    NeuronLayerState sa = NeuronLayerState::zero(1, 1);
    NeuronLayerState sb = NeuronLayerState::zero(1, 1);
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
      Vector z = Vector::Constant(1, rng.bernoulli(0.6) ? 1.0 : 0.0);
      auto [na, ra] = alif_step(sa, z, zero_beta);
      auto [nb, rb] = lif_step(sb, z, p.lif);
      sa = na;
      sb = nb;
      CHECK((ra.V.array() == rb.V.array()).all());
      CHECK((ra.z.array() == rb.z.array()).all());
    }
  }
  SUBCASE("threshold rises after a spike") {
    NeuronLayerState s = NeuronLayerState::zero(1, 1);
    s.z_prev[0] = 1.0;  // a spike just happened
    auto [next, rec] = alif_step(s, Vector::Zero(1), p);
    CHECK(next.a[0] == 1.0);  // decayed 0 plus the spike
    // Effective threshold used this step was theta + beta * 1.
    auto [next2, rec2] = alif_step(next, Vector::Zero(1), p);
    CHECK(next2.a[0] == doctest::Approx(p.adapt_decay()));
  }
  SUBCASE("adaptation trace decays geometrically in silence") {
    NeuronLayerState s = NeuronLayerState::zero(1, 1);
    s.a[0] = 2.0;
    NeuronLayerState cur = s;
    for (int t = 0; t < 7; ++t) cur = alif_step(cur, Vector::Zero(1), p).first;
    CHECK(cur.a[0] ==
          doctest::Approx(2.0 * std::pow(p.adapt_decay(), 7)).epsilon(1e-12));
  }
}

TEST_CASE("gate-off reduction: rho constant over any input stream") {
  DgnLayerParams p = small_params(2, 2);
  p.dynamic_gate_enabled = false;
  p.truncation = Truncation::HardClamp01;
  NeuronLayerState s = NeuronLayerState::zero(2, 2);
  Rng rng(29);
  const double expect = std::min(1.0, std::max(0.0, 1.0 - p.g_l * p.dt));
  for (int t = 0; t < 25; ++t) {
    Vector z(2);
    z << rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0);
    auto [next, rec] = dgn_step(s, z, p);
    s = next;
    CHECK(rec.rho[0] == expect);
    CHECK(rec.rho[1] == expect);
  }
}

TEST_CASE("nonnegative inputs keep traces nonnegative") {
  DgnLayerParams p = small_params(2, 3);
  NeuronLayerState s = NeuronLayerState::zero(2, 3);
  Rng rng(31);
  for (int t = 0; t < 30; ++t) {
    Vector z(3);
    for (Index i = 0; i < 3; ++i) z[i] = rng.uniform(0.0, 2.0);
    auto [next, rec] = dgn_step(s, z, p);
    s = next;
    CHECK((rec.D.array() >= 0.0).all());
    CHECK((rec.rho.array() >= 0.0).all());
    CHECK((rec.rho.array() <= 1.0).all());
  }
}

TEST_CASE("parameter validation") {
  DgnLayerParams p = small_params(1, 1);
  p.g_l = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = small_params(1, 1);
  p.C = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(p.validate(), Error);
}
