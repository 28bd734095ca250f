#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "dgn/surrogate.hpp"
#include "dgn/types.hpp"

namespace dgn {

// Single-layer parameters of the conductance-gated unit.
//
// The discrete dynamics per timestep, with per-synapse traces D (one row per
// output unit, one column per input channel):
//
//   D_t   = exp(-dt/tau_s) * D_{t-1} + z_in           (broadcast over rows)
//   pre_t = 1 - [static] g_l*dt - [dynamic] dt * sum_i C_i D_i
//   rho_t = phi(pre_t)
//   V_t   = rho_t * V_{t-1} + dt * sum_i W_i D_i - theta * z_{t-1}
//   z_t   = 1 where V_t >= theta
//
// The gate flags implement the two ablations: static_gate_enabled=false
// removes the g_l*dt term from the pre-activation, dynamic_gate_enabled=false
// removes the conductance term (the unit then behaves like a LIF neuron with
// a truncated-linear decay).
struct DgnLayerParams {
  Matrix W;  // out_units x in_channels, input-current weights
  Matrix C;  // same shape, dynamic-conductance weights
  double g_l = 1.0;
  double tau_s = 1.0;
  double dt = 1.0;
  double theta = 1.0;
  bool static_gate_enabled = true;
  bool dynamic_gate_enabled = true;
  Truncation truncation = Truncation::Sigmoid;
  SurrogateSpec surrogate;

  Index units() const { return W.rows(); }
  Index channels() const { return W.cols(); }
  double trace_decay() const { return std::exp(-dt / tau_s); }
  void validate() const;
};

struct LifLayerParams {
  Matrix W;
  double g_l = 1.0;
  double tau_s = 1.0;
  double dt = 1.0;
  double theta = 1.0;
  SurrogateSpec surrogate;
  // Membrane decay; defaults to exp(-g_l*dt), overridable so the unit can be
  // matched against a gate-disabled conductance unit.
  std::optional<double> rho_m;

  Index units() const { return W.rows(); }
  Index channels() const { return W.cols(); }
  double decay() const { return rho_m ? *rho_m : std::exp(-g_l * dt); }
  double trace_decay() const { return std::exp(-dt / tau_s); }
};

// LIF plus an activity-dependent threshold theta_t = theta + beta * a_t,
// where a_t is a decaying trace of the unit's own spikes.
struct AlifLayerParams {
  LifLayerParams lif;
  double beta = 0.0;
  double tau_adapt = 1.0;

  double adapt_decay() const { return std::exp(-lif.dt / tau_adapt); }
};

struct NeuronLayerState {
  Matrix D;       // units x in_channels synaptic traces
  Vector V;       // units
  Vector z_prev;  // units, previous-step output spikes
  Vector a;       // units, adaptation trace (ALIF only, zero otherwise)

  static NeuronLayerState zero(Index units, Index channels);
};

// Everything the backward pass needs from one timestep.
struct StepRecord {
  Matrix D;
  Vector rho;
  Vector pre_activation;  // argument handed to the truncation
  Vector V;
  Vector z;
  Vector psi;
};

Matrix synapse_trace_step(const Matrix& D_prev, const Vector& z_in,
                          const DgnLayerParams& params);

struct DecayFactor {
  Vector rho;
  Vector pre_activation;
};
DecayFactor decay_factor(const Matrix& D_t, const DgnLayerParams& params);

Vector membrane_step(const Vector& V_prev, const Vector& rho, const Matrix& D_t,
                     const Vector& z_out_prev, const DgnLayerParams& params);

struct FireResult {
  Vector z;
  Vector psi;
};
FireResult fire(const Vector& V_t, const DgnLayerParams& params);

std::pair<NeuronLayerState, StepRecord> dgn_step(const NeuronLayerState& state,
                                                 const Vector& z_in,
                                                 const DgnLayerParams& params);

std::pair<NeuronLayerState, StepRecord> lif_step(const NeuronLayerState& state,
                                                 const Vector& z_in,
                                                 const LifLayerParams& params);

std::pair<NeuronLayerState, StepRecord> alif_step(
    const NeuronLayerState& state, const Vector& z_in,
    const AlifLayerParams& params);

}  // namespace dgn
