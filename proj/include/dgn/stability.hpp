#pragma once

#include <cstdint>
#include <string>

#include "dgn/types.hpp"

namespace dgn {

// Numerical laboratory for the noise-driven subthreshold membrane
//
//   dV/dt = -(g_l + sum_i C_i I_i(t)) V + sum_i W_i I_i(t),
//   I_i(t) = mu_i + sigma_i xi(t),
//
// with a single shared white-noise source xi. No spiking or reset is applied;
// the analysis is purely about the stationary statistics of V.
enum class SdeMode { FullNonlinear, Linearized };

struct StabilityConfig {
  Vector mu;     // deterministic input components
  Vector sigma;  // noise intensities, >= 0
  Vector W;
  Vector C;
  double g_l = 1.0;
  double dt_sde = 0.0;   // 0 -> 0.005 / G0
  double t_end = 0.0;    // 0 -> 20 / G0
  double burn_in = 0.5;  // fraction of the horizon discarded
  long trials = 10000;
  SdeMode mode = SdeMode::Linearized;
  std::uint64_t seed = 0;

  // Effective steady-state conductance g_l + sum C_i mu_i.
  double G0() const;
  double effective_dt() const;
  double effective_t_end() const;
  void validate() const;  // rejects G0 <= 0 and malformed vectors
};

// sum W_i mu_i / G0.
double steady_state_mean(const StabilityConfig& cfg);

// [sum_i sigma_i (W_i - C_i * V_steady)]^2 / (2 G0).
double analytic_variance_dgn(const StabilityConfig& cfg);

// (sum_i W_i sigma_i)^2 / (2 g_l): the C = 0 special case.
double analytic_variance_lif(const StabilityConfig& cfg);

struct SdeSummary {
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
  long trials = 0;
  double dt = 0.0;
  double t_end = 0.0;
};

// Euler-Maruyama with one Gaussian increment per step (the noise source is
// shared across channels). Linearized mode freezes the multiplicative term at
// V_steady; FullNonlinear keeps -sum C_i sigma_i xi V with the Ito
// (non-anticipating) convention. Statistics pool time and ensemble after
// burn-in; standard errors come from the per-trial spread.
SdeSummary simulate_sde(const StabilityConfig& cfg);

struct StabilityReport {
  double analytic_mean_dgn = 0.0;
  double analytic_var_dgn = 0.0;
  double analytic_var_lif = 0.0;
  SdeSummary mc_dgn;
  SdeSummary mc_lif;
  double ratio_analytic = 0.0;  // dgn / lif
  double ratio_mc = 0.0;
  bool dgn_below_lif_analytic = false;
  bool dgn_below_lif_mc = false;
};

// Requires matched W, sigma, mu between the two configs; the LIF config must
// have C = 0.
StabilityReport compare_dgn_lif(const StabilityConfig& cfg_dgn,
                                const StabilityConfig& cfg_lif);

const char* to_string(SdeMode mode);
SdeMode sde_mode_from_string(const std::string& s);

}  // namespace dgn
