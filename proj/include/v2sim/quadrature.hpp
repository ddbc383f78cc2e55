#pragma once

#include <vector>

namespace v2sim {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for integrals of exp(-x^2) f(x) over the real line
/// (Golub-Welsch).
QuadratureRule gaussHermite(int n);

/// Nodes and weights (summing to 1) for averaging over a normal distribution
/// with the given full width at half maximum. A zero width yields one node at 0.
QuadratureRule gaussianAverage(double fwhm, int n);

inline constexpr double kFwhmPerSigma = 2.3548200450309493;

}  // namespace v2sim
