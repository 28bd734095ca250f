#pragma once

#include <string>
#include <vector>

#include "dgn/network.hpp"
#include "dgn/perturbation.hpp"
#include "dgn/training.hpp"

namespace dgn {

// Named hyperparameter bundles for the benchmark configurations. Layer
// dynamics use g_l = 1/tau_m with dt = 1 time-step unit.
struct Preset {
  std::string name;
  LayerConfig layer;  // kind/units/recurrent filled by the caller
  InitSpec init;
  int epochs = 64;
  double lr = 1e-3;
  Index hidden_units = 100;
};

// Known names: ti46-ff, ti46-rec, tidigits-ff, tidigits-rec, shd-ff, shd-rec,
// ssc-ff, ssc-rec, synth.
Preset get_preset(const std::string& name);
std::vector<std::string> preset_names();

// The six standard operating points (additive p=0.006, subtractive p=0.3,
// mixed p=0.006 with 10x factor, FGSM/PGD/BIM eps=0.003, alpha=0.01, k=4).
std::vector<PerturbationSpec> paper_points(std::uint64_t seed);

}  // namespace dgn
