#pragma once
// Independent reference computations used by the unit tests.

#include "v2sim/spin_core.hpp"
#include "v2sim/units.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

/// Eigenvalues from the general (non-Hermitian) complex solver, sorted by real part.
inline std::vector<double> eigenvaluesGeneral(const Eigen::MatrixXcd& h) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()(i).real());
  std::sort(out.begin(), out.end());
  return out;
}

/// Axial S=3/2 levels with the field along c: E_m = g beta B m + D (m^2 - 5/4).
inline double axialLevel(double g, double d, double b, double m) {
  return v2sim::larmorMHz(g, b) * m + d * (m * m - 1.25);
}

/// theta = 0 resonance field of m -> m+1: g beta B + D (2m + 1) = f.
inline double axialResonance(double g, double d, double fMHz, double m) {
  return (fMHz - d * (2.0 * m + 1.0)) / v2sim::larmorMHz(g, 1.0);
}

/// |<m|S+|m-1>|^2 / 4 matrix element of Sx.
inline double sxElementSq(double s, double m) {
  const double v = 0.5 * std::sqrt(s * (s + 1.0) - m * (m - 1.0));
  return v * v;
}

/// Random Hermitian positive density matrix of dimension n.
inline Eigen::MatrixXcd randomDensity(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline double hermiticityError(const Eigen::MatrixXcd& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline double minEigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return s.eigenvalues().minCoeff();
}

}  // namespace oracle
