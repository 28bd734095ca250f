#include "dgn/neuron.hpp"

#include <string>

#include "dgn/error.hpp"

namespace dgn {

void DgnLayerParams::validate() const {
  require(g_l > 0.0, "DgnLayerParams: g_l must be > 0");
  require(tau_s > 0.0, "DgnLayerParams: tau_s must be > 0");
  require(dt > 0.0, "DgnLayerParams: dt must be > 0");
  require(theta > 0.0, "DgnLayerParams: theta must be > 0");
  require(surrogate.width > 0.0, "DgnLayerParams: surrogate width must be > 0");
  require(W.rows() == C.rows() && W.cols() == C.cols(),
          "DgnLayerParams: W and C must have identical shape");
}

NeuronLayerState NeuronLayerState::zero(Index units, Index channels) {
  NeuronLayerState s;
  s.D = Matrix::Zero(units, channels);
  s.V = Vector::Zero(units);
  s.z_prev = Vector::Zero(units);
  s.a = Vector::Zero(units);
  return s;
}

namespace {

void check_shapes(const Matrix& D, const Vector& z_in, const Matrix& W,
                  const char* op) {
  require(D.rows() == W.rows() && D.cols() == W.cols(),
          std::string(op) + ": trace shape " + std::to_string(D.rows()) + "x" +
              std::to_string(D.cols()) + " does not match weights " +
              std::to_string(W.rows()) + "x" + std::to_string(W.cols()));
  require(z_in.size() == W.cols(),
          std::string(op) + ": input size " + std::to_string(z_in.size()) +
              " does not match " + std::to_string(W.cols()) + " channels");
}

Matrix trace_update(const Matrix& D_prev, const Vector& z_in, double decay) {
  Matrix D = decay * D_prev;
  D.rowwise() += z_in.transpose();
  return D;
}

}  // namespace

Matrix synapse_trace_step(const Matrix& D_prev, const Vector& z_in,
                          const DgnLayerParams& params) {
  check_shapes(D_prev, z_in, params.W, "synapse_trace_step");
  return trace_update(D_prev, z_in, params.trace_decay());
}

DecayFactor decay_factor(const Matrix& D_t, const DgnLayerParams& params) {
  require(D_t.rows() == params.W.rows() && D_t.cols() == params.W.cols(),
          "decay_factor: trace shape does not match weights");
  DecayFactor out;
  out.pre_activation = Vector::Constant(params.units(), 1.0);
  if (params.static_gate_enabled)
    out.pre_activation.array() -= params.g_l * params.dt;
  if (params.dynamic_gate_enabled)
    out.pre_activation -=
        params.dt * params.C.cwiseProduct(D_t).rowwise().sum();
  out.rho = truncation_value(params.truncation, out.pre_activation);
  return out;
}

Vector membrane_step(const Vector& V_prev, const Vector& rho, const Matrix& D_t,
                     const Vector& z_out_prev,
                     const DgnLayerParams& params) {
  require(V_prev.size() == params.units() && rho.size() == params.units() &&
              z_out_prev.size() == params.units(),
          "membrane_step: state size does not match layer units");
  return rho.cwiseProduct(V_prev) +
         params.dt * params.W.cwiseProduct(D_t).rowwise().sum() -
         params.theta * z_out_prev;
}

FireResult fire(const Vector& V_t, const DgnLayerParams& params) {
  FireResult out;
  out.z = (V_t.array() >= params.theta).cast<double>().matrix();
  out.psi = surrogate_value(params.surrogate,
                            Vector((V_t.array() - params.theta).matrix()));
  return out;
}

std::pair<NeuronLayerState, StepRecord> dgn_step(const NeuronLayerState& state,
                                                 const Vector& z_in,
                                                 const DgnLayerParams& params) {
  StepRecord rec;
  rec.D = synapse_trace_step(state.D, z_in, params);
  auto decay = decay_factor(rec.D, params);
  rec.rho = std::move(decay.rho);
  rec.pre_activation = std::move(decay.pre_activation);
  rec.V = membrane_step(state.V, rec.rho, rec.D, state.z_prev, params);
  auto fired = fire(rec.V, params);
  rec.z = std::move(fired.z);
  rec.psi = std::move(fired.psi);

  NeuronLayerState next;
  next.D = rec.D;
  next.V = rec.V;
  next.z_prev = rec.z;
  next.a = state.a;
  return {std::move(next), std::move(rec)};
}

std::pair<NeuronLayerState, StepRecord> lif_step(const NeuronLayerState& state,
                                                 const Vector& z_in,
                                                 const LifLayerParams& params) {
  check_shapes(state.D, z_in, params.W, "lif_step");
  StepRecord rec;
  rec.D = trace_update(state.D, z_in, params.trace_decay());
  rec.rho = Vector::Constant(params.units(), params.decay());
  rec.pre_activation = Vector::Zero(params.units());
  rec.V = rec.rho.cwiseProduct(state.V) +
          params.dt * params.W.cwiseProduct(rec.D).rowwise().sum() -
          params.theta * state.z_prev;
  rec.z = (rec.V.array() >= params.theta).cast<double>().matrix();
  rec.psi = surrogate_value(params.surrogate,
                            Vector((rec.V.array() - params.theta).matrix()));

  NeuronLayerState next;
  next.D = rec.D;
  next.V = rec.V;
  next.z_prev = rec.z;
  next.a = state.a;
  return {std::move(next), std::move(rec)};
}

std::pair<NeuronLayerState, StepRecord> alif_step(
    const NeuronLayerState& state, const Vector& z_in,
    const AlifLayerParams& params) {
  const auto& lif = params.lif;
  require(params.beta >= 0.0, "alif_step: beta must be >= 0");
  require(params.tau_adapt > 0.0, "alif_step: tau_adapt must be > 0");
  check_shapes(state.D, z_in, lif.W, "alif_step");

  StepRecord rec;
  rec.D = trace_update(state.D, z_in, lif.trace_decay());
  rec.rho = Vector::Constant(lif.units(), lif.decay());
  rec.pre_activation = Vector::Zero(lif.units());
  rec.V = rec.rho.cwiseProduct(state.V) +
          lif.dt * lif.W.cwiseProduct(rec.D).rowwise().sum() -
          lif.theta * state.z_prev;

  Vector a = params.adapt_decay() * state.a + state.z_prev;
  // Effective threshold rises with recent activity; the reset still uses the
  // base theta.
  Vector theta_eff = Vector::Constant(lif.units(), lif.theta) + params.beta * a;
  rec.z = (rec.V.array() >= theta_eff.array()).cast<double>().matrix();
  rec.psi = surrogate_value(lif.surrogate, Vector(rec.V - theta_eff));

  NeuronLayerState next;
  next.D = rec.D;
  next.V = rec.V;
  next.z_prev = rec.z;
  next.a = std::move(a);
  return {std::move(next), std::move(rec)};
}

}  // namespace dgn
