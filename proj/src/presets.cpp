#include "dgn/presets.hpp"

#include "dgn/error.hpp"

namespace dgn {

namespace {

Preset base_preset(const std::string& name, double tau_m, double tau_s,
                   double theta, InitSpec init, int epochs, Index hidden) {
  Preset p;
  p.name = name;
  p.layer.g_l = 1.0 / tau_m;
  p.layer.tau_s = tau_s;
  p.layer.dt = 1.0;
  p.layer.theta = theta;
  p.init = init;
  p.epochs = epochs;
  p.lr = 1e-3;
  p.hidden_units = hidden;
  return p;
}

}  // namespace

Preset get_preset(const std::string& name) {
  const InitSpec both_001{0.01, 0.005, 0.01, 0.005};
  const InitSpec small_c{0.01, 0.005, 0.001, 0.0005};
  const InitSpec both_0001{0.001, 0.0005, 0.001, 0.0005};

  if (name == "ti46-ff")
    return base_preset(name, 10.0, 2.0, 1.0, both_001, 64, 100);
  if (name == "ti46-rec") {
    Preset p = base_preset(name, 15.0, 1.5, 1.0, both_001, 64, 100);
    p.layer.recurrent = true;
    return p;
  }
  if (name == "tidigits-ff")
    return base_preset(name, 100.0, 1.0, 1.0, small_c, 64, 100);
  if (name == "tidigits-rec") {
    Preset p = base_preset(name, 10.0, 2.5, 1.0, both_001, 64, 100);
    p.layer.recurrent = true;
    return p;
  }
  if (name == "shd-ff")
    return base_preset(name, 1.0, 0.02, 1.0, both_001, 128, 128);
  if (name == "shd-rec") {
    Preset p = base_preset(name, 1.0, 0.02, 1.0, both_0001, 128, 128);
    p.layer.recurrent = true;
    return p;
  }
  if (name == "ssc-ff")
    return base_preset(name, 1.0, 0.02, 1.0, both_001, 128, 128);
  if (name == "ssc-rec") {
    Preset p = base_preset(name, 1.0, 0.02, 1.0, both_001, 128, 128);
    p.layer.recurrent = true;
    return p;
  }
  if (name == "synth") {
    // Desk-scale defaults for the synthetic pattern task.
    Preset p = base_preset(name, 10.0, 2.0, 1.0,
                           InitSpec{0.03, 0.015, 0.03, 0.015}, 50, 16);
    p.lr = 0.01;
    return p;
  }
  fail("unknown preset: '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"ti46-ff",  "ti46-rec", "tidigits-ff", "tidigits-rec", "shd-ff",
          "shd-rec",  "ssc-ff",   "ssc-rec",     "synth"};
}

std::vector<PerturbationSpec> paper_points(std::uint64_t seed) {
  std::vector<PerturbationSpec> specs(6);
  specs[0].kind = PerturbationKind::Additive;
  specs[0].p = 0.006;
  specs[1].kind = PerturbationKind::Subtractive;
  specs[1].p = 0.3;
  specs[2].kind = PerturbationKind::Mixed;
  specs[2].p = 0.006;
  specs[2].mixed_factor = 10.0;
  specs[3].kind = PerturbationKind::Fgsm;
  specs[3].epsilon = 0.003;
  specs[4].kind = PerturbationKind::Pgd;
  specs[4].epsilon = 0.003;
  specs[4].alpha = 0.01;
  specs[4].k = 4;
  specs[5].kind = PerturbationKind::Bim;
  specs[5].epsilon = 0.003;
  specs[5].alpha = 0.01;
  specs[5].k = 4;
  for (auto& s : specs) s.seed = seed;
  return specs;
}

}  // namespace dgn
