#include "dgn/perturbation.hpp"

#include <cmath>
#include <string>

#include "dgn/error.hpp"
#include "dgn/gradients.hpp"

namespace dgn {

void PerturbationSpec::validate() const {
  require(p >= 0.0 && p <= 1.0, "PerturbationSpec: p must lie in [0, 1]");
  require(epsilon >= 0.0, "PerturbationSpec: epsilon must be >= 0");
  require(mixed_factor >= 0.0, "PerturbationSpec: mixed_factor must be >= 0");
  if (kind == PerturbationKind::Pgd || kind == PerturbationKind::Bim)
    require(k >= 1, "PerturbationSpec: k must be >= 1 for PGD/BIM");
}

namespace {

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Column-major element visit order shared by the noise injectors.
template <class F>
void for_each_element(Matrix& m, F&& f) {
  for (Index t = 0; t < m.cols(); ++t)
    for (Index c = 0; c < m.rows(); ++c) f(m(c, t));
}

SpikeTensor clamp_below_0(Matrix m) {
  return SpikeTensor(m.cwiseMax(0.0));
}

}  // namespace

SpikeTensor additive_noise(const SpikeTensor& x, double p, Rng& rng) {
  require(p >= 0.0 && p <= 1.0, "additive_noise: p must lie in [0, 1]");
  Matrix out = x.values;
  for_each_element(out, [&](double& v) {
    if (rng.bernoulli(p)) v += 1.0;
  });
  return clamp_below_0(std::move(out));
}

SpikeTensor subtractive_noise(const SpikeTensor& x, double p, Rng& rng) {
  require(p >= 0.0 && p <= 1.0, "subtractive_noise: p must lie in [0, 1]");
  Matrix out = x.values;
  for_each_element(out, [&](double& v) {
    if (v > 0.0 && rng.bernoulli(p)) v -= 1.0;
  });
  return clamp_below_0(std::move(out));
}

SpikeTensor mixed_noise(const SpikeTensor& x, double p, double factor,
                        Rng& rng) {
  require(p >= 0.0 && p <= 1.0, "mixed_noise: p must lie in [0, 1]");
  const double p_sub = std::min(p * factor, 1.0);
  Matrix out = x.values;
  for_each_element(out, [&](double& v) {
    if (v > 0.0) {
      if (rng.bernoulli(p_sub)) v -= 1.0;
    } else {
      if (rng.bernoulli(p)) v += 1.0;
    }
  });
  return clamp_below_0(std::move(out));
}

SpikeTensor fgsm(const Network& net, const SpikeTensor& x, Index label,
                 double epsilon, bool gate_path) {
  require(epsilon >= 0.0, "fgsm: epsilon must be >= 0");
  const Matrix g = input_gradient(net, x, label, gate_path);
  Matrix out = x.values + epsilon * g.unaryExpr([](double v) {
    return sign0(v);
  });
  return clamp_below_0(std::move(out));
}

namespace {

SpikeTensor iterative_attack(const Network& net, const SpikeTensor& x,
                             Index label, double epsilon, double alpha, int k,
                             const Matrix& start, bool gate_path) {
  const Matrix lo = x.values.array() - epsilon;
  const Matrix hi = x.values.array() + epsilon;
  Matrix adv = start;
  for (int it = 0; it < k; ++it) {
    // Gradient at the current iterate; intermediate iterates may carry small
    // negative entries, the dynamics are evaluated on them as-is and only the
    // final output is clamped.
    const Matrix g = input_gradient(net, SpikeTensor(adv), label, gate_path);
    adv += alpha * g.unaryExpr([](double v) { return sign0(v); });
    adv = adv.cwiseMax(lo).cwiseMin(hi);
  }
  return clamp_below_0(std::move(adv));
}

}  // namespace

SpikeTensor pgd(const Network& net, const SpikeTensor& x, Index label,
                double epsilon, double alpha, int k, Rng& rng,
                bool gate_path) {
  require(epsilon >= 0.0, "pgd: epsilon must be >= 0");
  require(k >= 1, "pgd: k must be >= 1");
  Matrix start = x.values;
  for (Index t = 0; t < start.cols(); ++t)
    for (Index c = 0; c < start.rows(); ++c)
      start(c, t) += rng.uniform(-epsilon, epsilon);
  return iterative_attack(net, x, label, epsilon, alpha, k, start, gate_path);
}

SpikeTensor bim(const Network& net, const SpikeTensor& x, Index label,
                double epsilon, double alpha, int k, bool gate_path) {
  require(epsilon >= 0.0, "bim: epsilon must be >= 0");
  require(k >= 1, "bim: k must be >= 1");
  return iterative_attack(net, x, label, epsilon, alpha, k, x.values,
                          gate_path);
}

SpikeTensor perturb_sample(const Network& net, const SpikeTensor& x,
                           Index label, const PerturbationSpec& spec,
                           std::uint64_t sample_index) {
  spec.validate();
  Rng rng = derive_stream(spec.seed, sample_index);
  switch (spec.kind) {
    case PerturbationKind::Additive:
      return additive_noise(x, spec.p, rng);
    case PerturbationKind::Subtractive:
      return subtractive_noise(x, spec.p, rng);
    case PerturbationKind::Mixed:
      return mixed_noise(x, spec.p, spec.mixed_factor, rng);
    case PerturbationKind::Fgsm:
      return fgsm(net, x, label, spec.epsilon);
    case PerturbationKind::Pgd:
      return pgd(net, x, label, spec.epsilon, spec.alpha, spec.k, rng);
    case PerturbationKind::Bim:
      return bim(net, x, label, spec.epsilon, spec.alpha, spec.k);
  }
  fail("unknown perturbation kind");
}

std::vector<PerturbationRow> evaluate_under(
    const Network& net, const Dataset& ds,
    const std::vector<PerturbationSpec>& specs) {
  require(!ds.empty(), "evaluate_under: empty dataset");
  std::vector<PerturbationRow> rows;

  PerturbationRow clean;
  clean.clean = true;
  clean.accuracy = accuracy(net, ds);
  rows.push_back(clean);

  for (const auto& spec : specs) {
    Index correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const SpikeTensor adv =
          perturb_sample(net, ds[i].x, ds[i].label, spec, i);
      if (predict(net, adv) == ds[i].label) ++correct;
    }
    PerturbationRow row;
    row.spec = spec;
    row.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
    rows.push_back(row);
  }
  return rows;
}

const char* to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::Additive: return "additive";
    case PerturbationKind::Subtractive: return "subtractive";
    case PerturbationKind::Mixed: return "mixed";
    case PerturbationKind::Fgsm: return "fgsm";
    case PerturbationKind::Pgd: return "pgd";
    case PerturbationKind::Bim: return "bim";
  }
  fail("unknown perturbation kind");
}

PerturbationKind perturbation_kind_from_string(const std::string& s) {
  if (s == "additive") return PerturbationKind::Additive;
  if (s == "subtractive") return PerturbationKind::Subtractive;
  if (s == "mixed") return PerturbationKind::Mixed;
  if (s == "fgsm") return PerturbationKind::Fgsm;
  if (s == "pgd") return PerturbationKind::Pgd;
  if (s == "bim") return PerturbationKind::Bim;
  fail("unknown perturbation kind: '" + s + "'");
}

}  // namespace dgn
