#include "dgn/stability.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "dgn/error.hpp"
#include "dgn/rng.hpp"

namespace dgn {

double StabilityConfig::G0() const { return g_l + C.dot(mu); }

double StabilityConfig::effective_dt() const {
  return dt_sde > 0.0 ? dt_sde : 0.005 / G0();
}

double StabilityConfig::effective_t_end() const {
  return t_end > 0.0 ? t_end : 20.0 / G0();
}

void StabilityConfig::validate() const {
  const Index n = mu.size();
  require(n > 0, "StabilityConfig: empty input vectors");
  require(sigma.size() == n && W.size() == n && C.size() == n,
          "StabilityConfig: mu, sigma, W, C must have equal length");
  require((sigma.array() >= 0.0).all(),
          "StabilityConfig: sigma must be nonnegative");
  require(g_l > 0.0, "StabilityConfig: g_l must be > 0");
  require(burn_in >= 0.0 && burn_in < 1.0,
          "StabilityConfig: burn_in must lie in [0, 1)");
  require(trials >= 1, "StabilityConfig: trials must be >= 1");
  require(G0() > 0.0,
          "StabilityConfig: unstable configuration, G0 = g_l + sum C_i mu_i "
          "must be > 0 (got " + std::to_string(G0()) + ")");
}

double steady_state_mean(const StabilityConfig& cfg) {
  cfg.validate();
  return cfg.W.dot(cfg.mu) / cfg.G0();
}

double analytic_variance_dgn(const StabilityConfig& cfg) {
  cfg.validate();
  const double v_steady = cfg.W.dot(cfg.mu) / cfg.G0();
  const double num = cfg.sigma.dot(cfg.W - cfg.C * v_steady);
  return num * num / (2.0 * cfg.G0());
}

double analytic_variance_lif(const StabilityConfig& cfg) {
  require(cfg.g_l > 0.0, "analytic_variance_lif: g_l must be > 0");
  require(cfg.sigma.size() == cfg.W.size(),
          "analytic_variance_lif: sigma and W must have equal length");
  const double num = cfg.W.dot(cfg.sigma);
  return num * num / (2.0 * cfg.g_l);
}

SdeSummary simulate_sde(const StabilityConfig& cfg) {
  cfg.validate();
  const double G0 = cfg.G0();
  const double dt = cfg.effective_dt();
  require(dt > 0.0, "simulate_sde: dt_sde must be > 0");
  require(dt <= 0.01 / G0 + 1e-15,
          "simulate_sde: dt_sde exceeds the stability bound 0.01 / G0");
  const double horizon = cfg.effective_t_end();
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  require(steps >= 10, "simulate_sde: horizon too short for the step size");
  const auto burn = static_cast<long>(std::llround(steps * cfg.burn_in));

  const double drive = cfg.W.dot(cfg.mu);
  const double v_steady = drive / G0;
  // Shared-noise diffusion terms: one xi(t) drives every channel.
  const double diff_const = cfg.sigma.dot(cfg.W - cfg.C * v_steady);
  const double diff_w = cfg.W.dot(cfg.sigma);
  const double diff_c = cfg.C.dot(cfg.sigma);
  const double sqrt_dt = std::sqrt(dt);
  const bool linear = cfg.mode == SdeMode::Linearized;

  // Pooled moments plus per-trial statistics for the standard errors.
  double pool_sum = 0.0, pool_sum2 = 0.0;
  long pool_n = 0;
  std::vector<double> trial_mean(cfg.trials), trial_var(cfg.trials);

  for (long trial = 0; trial < cfg.trials; ++trial) {
    Rng rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(trial));
    double v = 0.0;
    double s1 = 0.0, s2 = 0.0;
    long n = 0;
    for (long k = 0; k < steps; ++k) {
      const double noise = rng.gaussian();
      const double diffusion = linear ? diff_const : (diff_w - diff_c * v);
      v += (-G0 * v + drive) * dt + diffusion * sqrt_dt * noise;
      if (k >= burn) {
        s1 += v;
        s2 += v * v;
        ++n;
      }
    }
    if (!std::isfinite(v))
      fail("simulate_sde: trajectory diverged in trial " +
           std::to_string(trial) + " (G0 = " + std::to_string(G0) +
           ", dt = " + std::to_string(dt) + ")");
    trial_mean[trial] = s1 / static_cast<double>(n);
    trial_var[trial] =
        s2 / static_cast<double>(n) - trial_mean[trial] * trial_mean[trial];
    pool_sum += s1;
    pool_sum2 += s2;
    pool_n += n;
  }

  SdeSummary out;
  out.trials = cfg.trials;
  out.dt = dt;
  out.t_end = horizon;
  out.mean = pool_sum / static_cast<double>(pool_n);
  out.variance = pool_sum2 / static_cast<double>(pool_n) - out.mean * out.mean;
  if (cfg.trials > 1) {
    double acc_m = 0.0, acc_v = 0.0;
    for (long k = 0; k < cfg.trials; ++k) {
      acc_m += (trial_mean[k] - out.mean) * (trial_mean[k] - out.mean);
      acc_v += (trial_var[k] - out.variance) * (trial_var[k] - out.variance);
    }
    const double K = static_cast<double>(cfg.trials);
    out.mean_se = std::sqrt(acc_m / (K - 1.0) / K);
    out.variance_se = std::sqrt(acc_v / (K - 1.0) / K);
  }
  return out;
}

StabilityReport compare_dgn_lif(const StabilityConfig& cfg_dgn,
                                const StabilityConfig& cfg_lif) {
  cfg_dgn.validate();
  cfg_lif.validate();
  require((cfg_lif.C.array() == 0.0).all(),
          "compare_dgn_lif: the LIF config must have C = 0");
  auto same = [](const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
  };
  require(same(cfg_dgn.W, cfg_lif.W) && same(cfg_dgn.sigma, cfg_lif.sigma) &&
              same(cfg_dgn.mu, cfg_lif.mu),
          "compare_dgn_lif: W, sigma, mu must match between configs");

  StabilityReport rep;
  rep.analytic_mean_dgn = steady_state_mean(cfg_dgn);
  rep.analytic_var_dgn = analytic_variance_dgn(cfg_dgn);
  rep.analytic_var_lif = analytic_variance_lif(cfg_lif);
  rep.mc_dgn = simulate_sde(cfg_dgn);
  rep.mc_lif = simulate_sde(cfg_lif);
  rep.ratio_analytic = rep.analytic_var_lif > 0.0
                           ? rep.analytic_var_dgn / rep.analytic_var_lif
                           : (rep.analytic_var_dgn > 0.0 ? 0.0 : 1.0);
  rep.ratio_mc = rep.mc_lif.variance > 0.0
                     ? rep.mc_dgn.variance / rep.mc_lif.variance
                     : 1.0;
  rep.dgn_below_lif_analytic = rep.analytic_var_dgn < rep.analytic_var_lif;
  rep.dgn_below_lif_mc = rep.mc_dgn.variance < rep.mc_lif.variance;
  return rep;
}

const char* to_string(SdeMode mode) {
  switch (mode) {
    case SdeMode::FullNonlinear: return "full_nonlinear";
    case SdeMode::Linearized: return "linearized";
  }
  fail("unknown SDE mode");
}

SdeMode sde_mode_from_string(const std::string& s) {
  if (s == "full_nonlinear") return SdeMode::FullNonlinear;
  if (s == "linearized") return SdeMode::Linearized;
  fail("unknown SDE mode: '" + s + "'");
}

}  // namespace dgn
