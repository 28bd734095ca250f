#pragma once

#include "dgn/types.hpp"

namespace dgn {

// Pseudo-derivative used in place of the spike discontinuity during
// backpropagation. All kinds integrate to 1 and peak where the membrane
// potential meets the threshold. `width` is the support length for
// Rectangular, the half-support for Triangular, and the scale parameter for
// the two smooth kinds.
enum class SurrogateKind { Rectangular, Triangular, SigmoidDerivative, ATan };

struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::Triangular;
  double width = 1.0;
};

// Truncation applied to the decay pre-activation; Sigmoid squashes into
// (0, 1), HardClamp01 clips to [0, 1].
enum class Truncation { Sigmoid, HardClamp01 };

// u is (membrane potential - effective threshold).
double surrogate_value(const SurrogateSpec& spec, double u);

// Smooth (or piecewise smooth) primitive of the surrogate: monotone from 0 to
// 1 with value 1/2 at u = 0. Used as the spike function in smoothed mode,
// where the network becomes differentiable and finite differences apply.
double surrogate_primal(const SurrogateSpec& spec, double u);

Vector surrogate_value(const SurrogateSpec& spec, const Vector& u);
Vector surrogate_primal(const SurrogateSpec& spec, const Vector& u);

double truncation_value(Truncation kind, double x);
// Derivative of the truncation; for HardClamp01 the subgradient is 1 strictly
// inside (0, 1) and 0 outside and at the boundary.
double truncation_deriv(Truncation kind, double x);

Vector truncation_value(Truncation kind, const Vector& x);
Vector truncation_deriv(Truncation kind, const Vector& x);

const char* to_string(SurrogateKind kind);
const char* to_string(Truncation kind);
SurrogateKind surrogate_kind_from_string(const std::string& s);
Truncation truncation_from_string(const std::string& s);

}  // namespace dgn
