#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgn/network.hpp"
#include "dgn/rng.hpp"
#include "dgn/types.hpp"

namespace dgn {

enum class PerturbationKind { Additive, Subtractive, Mixed, Fgsm, Pgd, Bim };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::Additive;
  double p = 0.0;             // Bernoulli probability (noise kinds)
  double epsilon = 0.0;       // attack budget (L-infinity)
  double alpha = 0.0;         // attack step size (PGD/BIM)
  int k = 1;                  // attack iterations (PGD/BIM)
  double mixed_factor = 10.0; // subtractive-probability scale for Mixed
  std::uint64_t seed = 0;

  void validate() const;
};

// Bernoulli noise. Elements are visited column-major (all channels of
// timestep 0, then timestep 1, ...), one uniform draw per visited element;
// results are clamped below at zero.
SpikeTensor additive_noise(const SpikeTensor& x, double p, Rng& rng);
// Only elements with x > 0 are visited.
SpikeTensor subtractive_noise(const SpikeTensor& x, double p, Rng& rng);
// Nonzero elements lose a Bernoulli(min(p*factor, 1)) spike, zero elements
// gain a Bernoulli(p) spike. Every element consumes one draw.
SpikeTensor mixed_noise(const SpikeTensor& x, double p, double factor,
                        Rng& rng);

// Gradient-sign attacks under an L-infinity budget. sign(0) := 0, outputs are
// clamped below at zero (spike inputs have no upper bound).
SpikeTensor fgsm(const Network& net, const SpikeTensor& x, Index label,
                 double epsilon, bool gate_path = true);
SpikeTensor pgd(const Network& net, const SpikeTensor& x, Index label,
                double epsilon, double alpha, int k, Rng& rng,
                bool gate_path = true);
SpikeTensor bim(const Network& net, const SpikeTensor& x, Index label,
                double epsilon, double alpha, int k, bool gate_path = true);

// Applies `spec` to one sample; noise masks and the PGD start come from
// derive_stream(spec.seed, sample_index).
SpikeTensor perturb_sample(const Network& net, const SpikeTensor& x,
                           Index label, const PerturbationSpec& spec,
                           std::uint64_t sample_index);

struct PerturbationRow {
  bool clean = false;
  PerturbationSpec spec;
  double accuracy = 0.0;
};

// Accuracy per spec, preceded by a clean baseline row.
std::vector<PerturbationRow> evaluate_under(
    const Network& net, const Dataset& ds,
    const std::vector<PerturbationSpec>& specs);

const char* to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& s);

}  // namespace dgn
