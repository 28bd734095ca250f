#include "dgn/surrogate.hpp"

#include <cmath>
#include <numbers>

#include "dgn/error.hpp"

namespace dgn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double surrogate_value(const SurrogateSpec& spec, double u) {
  const double w = spec.width;
  switch (spec.kind) {
    case SurrogateKind::Rectangular:
      return std::abs(u) <= w / 2.0 ? 1.0 / w : 0.0;
    case SurrogateKind::Triangular: {
      const double t = 1.0 - std::abs(u) / w;
      return t > 0.0 ? t / w : 0.0;
    }
    case SurrogateKind::SigmoidDerivative: {
      const double s = sigmoid(u / w);
      return s * (1.0 - s) / w;
    }
    case SurrogateKind::ATan: {
      const double t = u / w;
      return 1.0 / (std::numbers::pi * w * (1.0 + t * t));
    }
  }
  fail("unknown surrogate kind");
}

double surrogate_primal(const SurrogateSpec& spec, double u) {
  const double w = spec.width;
  switch (spec.kind) {
    case SurrogateKind::Rectangular: {
      const double r = u / w + 0.5;
      return r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r);
    }
    case SurrogateKind::Triangular: {
      if (u <= -w) return 0.0;
      if (u >= w) return 1.0;
      if (u < 0.0) {
        const double t = u + w;
        return t * t / (2.0 * w * w);
      }
      const double t = w - u;
      return 1.0 - t * t / (2.0 * w * w);
    }
    case SurrogateKind::SigmoidDerivative:
      return sigmoid(u / w);
    case SurrogateKind::ATan:
      return std::atan(u / w) / std::numbers::pi + 0.5;
  }
  fail("unknown surrogate kind");
}

Vector surrogate_value(const SurrogateSpec& spec, const Vector& u) {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = surrogate_value(spec, u[i]);
  return out;
}

Vector surrogate_primal(const SurrogateSpec& spec, const Vector& u) {
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = surrogate_primal(spec, u[i]);
  return out;
}

double truncation_value(Truncation kind, double x) {
  switch (kind) {
    case Truncation::Sigmoid:
      return sigmoid(x);
    case Truncation::HardClamp01:
      return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
  }
  fail("unknown truncation kind");
}

double truncation_deriv(Truncation kind, double x) {
  switch (kind) {
    case Truncation::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Truncation::HardClamp01:
      return (x > 0.0 && x < 1.0) ? 1.0 : 0.0;
  }
  fail("unknown truncation kind");
}

Vector truncation_value(Truncation kind, const Vector& x) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out[i] = truncation_value(kind, x[i]);
  return out;
}

Vector truncation_deriv(Truncation kind, const Vector& x) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out[i] = truncation_deriv(kind, x[i]);
  return out;
}

const char* to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::Rectangular: return "rectangular";
    case SurrogateKind::Triangular: return "triangular";
    case SurrogateKind::SigmoidDerivative: return "sigmoid_derivative";
    case SurrogateKind::ATan: return "atan";
  }
  fail("unknown surrogate kind");
}

const char* to_string(Truncation kind) {
  switch (kind) {
    case Truncation::Sigmoid: return "sigmoid";
    case Truncation::HardClamp01: return "hard_clamp01";
  }
  fail("unknown truncation kind");
}

SurrogateKind surrogate_kind_from_string(const std::string& s) {
  if (s == "rectangular") return SurrogateKind::Rectangular;
  if (s == "triangular") return SurrogateKind::Triangular;
  if (s == "sigmoid_derivative") return SurrogateKind::SigmoidDerivative;
  if (s == "atan") return SurrogateKind::ATan;
  fail("unknown surrogate kind: '" + s + "'");
}

Truncation truncation_from_string(const std::string& s) {
  if (s == "sigmoid") return Truncation::Sigmoid;
  if (s == "hard_clamp01") return Truncation::HardClamp01;
  fail("unknown truncation kind: '" + s + "'");
}

}  // namespace dgn
