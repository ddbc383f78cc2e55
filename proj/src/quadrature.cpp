#include "v2sim/quadrature.hpp"

#include "v2sim/units.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace v2sim {

QuadratureRule gaussHermite(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double off = std::sqrt(0.5 * i);
    jacobi(i, i - 1) = off;
    jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = std::sqrt(kPi) * v0 * v0;
  }
  // the rule is symmetric; pin it exactly
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gaussianAverage(double fwhm, int n) {
  if (!(fwhm >= 0.0)) throw std::invalid_argument("distribution width must be non-negative");
  if (fwhm == 0.0) return QuadratureRule{{0.0}, {1.0}};
  QuadratureRule rule = gaussHermite(n);
  const double sigma = fwhm / kFwhmPerSigma;
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] *= std::sqrt(2.0) * sigma;
    rule.weights[i] /= std::sqrt(kPi);
  }
  return rule;
}

}  // namespace v2sim
