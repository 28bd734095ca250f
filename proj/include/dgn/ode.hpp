#pragma once

#include <vector>

#include "dgn/types.hpp"

namespace dgn {

// Continuous-time, subthreshold reference for the gated membrane equation
//
//   dV/dt = -(g_l + sum_i C_i D_i(t)) V + sum_i W_i D_i(t)
//
// with D_i(t) = sum_{spike s < t} exp(-(t - s)/tau_s): the trace decays
// exactly between spikes and jumps by +1 at each arrival. No firing or reset
// is applied. Integration is classical RK4 on V with the trace evaluated in
// closed form at the stage points, splitting steps at spike times so every
// RK4 step sees a smooth right-hand side.
struct OdeDgnConfig {
  Vector W;
  Vector C;
  double g_l = 1.0;
  double tau_s = 1.0;
};

// spike_times[i] holds the (sorted or unsorted) arrival times of channel i.
// Returns V sampled at 0, dt_fine, ..., t_end; t_end must be an integral
// multiple of dt_fine. Refuses dt_fine > tau_s / 10.
Vector ode_reference_dgn(const std::vector<std::vector<double>>& spike_times,
                         const OdeDgnConfig& cfg, double t_end, double dt_fine,
                         double v0 = 0.0);

// Conductance form dV/dt = -g_l V + sum_i g_i (E_i - V) with g_i = C_i D_i(t).
// With W_i := C_i * E_i this is the same trajectory as ode_reference_dgn.
Vector ode_reference_conductance(
    const std::vector<std::vector<double>>& spike_times, const Vector& C,
    const Vector& E, double g_l, double tau_s, double t_end, double dt_fine,
    double v0 = 0.0);

}  // namespace dgn
