#pragma once

#include <string>
#include <vector>

#include "dgn/network.hpp"

namespace dgn {

struct LayerGrads {
  Matrix dW;  // shaped like NetLayer::W (feedforward + recurrent block)
  Matrix dC;  // shaped like NetLayer::C, empty for non-gated kinds
};

struct GradientSet {
  std::vector<LayerGrads> layers;
  Matrix dW_L;

  static GradientSet zeros_like(const Network& net);
  void accumulate(const GradientSet& other);
  void scale(double s);
  bool all_finite() const;
};

// Closed-form path: per layer, forward-accumulated Jacobian chains
//   P_t = rho_t . P_{t-1} + dt * d_t^T          (per unit row)
//   Q_t = rho_t . Q_{t-1} - f'_t V_{t-1} dt d_t^T
// are combined with the total spike adjoint g_t (credit through readout,
// reset, adaptation, recurrence and upper layers), giving
//   dE/dW = sum_t diag(g_t . psi_t) P_t,   dE/dC = sum_t diag(g_t . psi_t) Q_t.
GradientSet bptt_closed_form(const Network& net, const ForwardCache& cache,
                             const Vector& dLdy);

// Reverse-mode path: a single adjoint sweep over the cached unrolled graph,
// accumulating weight gradients as outer products of membrane adjoints with
// the cached traces. Analytically identical to the closed form; kept
// algorithmically separate so the two can serve as mutual oracles.
GradientSet bptt_reverse_mode(const Network& net, const ForwardCache& cache,
                              const Vector& dLdy);

// Adjoint of the loss with respect to every input element. gate_path=false
// drops the conductance route when propagating into inputs (sensitivity
// studies); weight gradients are unaffected by the flag.
Matrix input_gradient(const Network& net, const ForwardCache& cache,
                      const Vector& dLdy, bool gate_path = true);
Matrix input_gradient(const Network& net, const SpikeTensor& x, Index label,
                      bool gate_path = true);

struct GradDiff {
  double max_rel_err = 0.0;
  std::string worst;  // e.g. "layer 0 dW"
};

// Worst elementwise difference per tensor, relative to the largest magnitude
// in that tensor pair (absolute scale when a tensor pair is all-zero).
GradDiff compare_gradients(const GradientSet& a, const GradientSet& b);

}  // namespace dgn
