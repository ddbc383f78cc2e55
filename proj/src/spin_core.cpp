#include "v2sim/spin_core.hpp"

#include "v2sim/units.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace v2sim {

namespace {

using cd = std::complex<double>;

constexpr double kBisectionToleranceG = 1e-6;
constexpr double kBracketWidthG = 1.0;

int twiceSpin(double spin) {
  const double twice = 2.0 * spin;
  const double rounded = std::round(twice);
  if (!(spin > 0.0) || std::abs(twice - rounded) > 1e-12) {
    throw std::invalid_argument("spin quantum number must be a positive multiple of 1/2");
  }
  return static_cast<int>(rounded);
}

}  // namespace

int SpinSystem::multiplicity() const { return twiceSpin(spin) + 1; }

void SpinSystem::validate() const {
  (void)multiplicity();
  if (!(g > 0.0)) throw std::invalid_argument("g factor must be positive");
  if (!(linewidthPP > 0.0)) throw std::invalid_argument("linewidthPP must be positive");
  if (zfsD != 0.0 && zfsE != 0.0 && std::abs(zfsE) > std::abs(zfsD) / 3.0 + 1e-12) {
    throw std::invalid_argument("rhombic splitting E must satisfy |E| <= |D|/3");
  }
}

void FieldOrientation::validate() const {
  if (!(magnitudeG >= 0.0)) throw std::invalid_argument("field magnitude must be >= 0");
  if (!(polarDeg >= 0.0 && polarDeg <= 90.0)) {
    throw std::invalid_argument("polar angle must lie in [0, 90] degrees");
  }
}

SpinOperators spinOperators(double spin) {
  const int dim = twiceSpin(spin) + 1;
  SpinOperators ops{ComplexMatrix::Zero(dim, dim), ComplexMatrix::Zero(dim, dim),
                    ComplexMatrix::Zero(dim, dim)};
  // index i holds m = S - i
  for (int i = 0; i < dim; ++i) {
    const double m = spin - i;
    ops.sz(i, i) = m;
    if (i + 1 < dim) {
      // <m|S+|m-1> = sqrt(S(S+1) - m(m-1))
      const double raise = std::sqrt(spin * (spin + 1.0) - m * (m - 1.0));
      ops.sx(i, i + 1) = 0.5 * raise;
      ops.sx(i + 1, i) = 0.5 * raise;
      ops.sy(i, i + 1) = cd(0.0, -0.5 * raise);
      ops.sy(i + 1, i) = cd(0.0, 0.5 * raise);
    }
  }
  return ops;
}

ComplexMatrix hamiltonian(const SpinSystem& sys, const Eigen::Vector3d& fieldG) {
  sys.validate();
  const SpinOperators ops = spinOperators(sys.spin);
  const int dim = sys.multiplicity();
  const double zeeman = sys.g * kBohrMHzPerGauss;
  const double s2 = sys.spin * (sys.spin + 1.0);
  const ComplexMatrix identity = ComplexMatrix::Identity(dim, dim);

  ComplexMatrix h = zeeman * (fieldG.x() * ops.sx + fieldG.y() * ops.sy + fieldG.z() * ops.sz);
  h += sys.zfsD * (ops.sz * ops.sz - (s2 / 3.0) * identity);
  if (sys.zfsE != 0.0) h += sys.zfsE * (ops.sx * ops.sx - ops.sy * ops.sy);
  // enforce exact Hermiticity against rounding in the products above
  return 0.5 * (h + h.adjoint());
}

ComplexMatrix hamiltonian(const SpinSystem& sys, const FieldOrientation& field) {
  field.validate();
  const double theta = degToRad(field.polarDeg);
  const Eigen::Vector3d b(field.magnitudeG * std::sin(theta), 0.0,
                          field.magnitudeG * std::cos(theta));
  return hamiltonian(sys, b);
}

ComplexMatrix perpendicularSpinOperator(const SpinSystem& sys, double polarDeg) {
  const SpinOperators ops = spinOperators(sys.spin);
  const double theta = degToRad(polarDeg);
  return std::cos(theta) * ops.sx - std::sin(theta) * ops.sz;
}

EigenSystem diagonalize(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    Eigen::Index pivot = 0;
    out.vectors.col(c).cwiseAbs().maxCoeff(&pivot);
    const cd v = out.vectors(pivot, c);
    out.vectors.col(c) *= std::conj(v) / std::abs(v);
  }
  return out;
}

double levelProjection(const SpinSystem& sys, int level) { return -sys.spin + level; }

TransitionSet transitions(const SpinSystem& sys, const FieldOrientation& field) {
  const EigenSystem eig = diagonalize(hamiltonian(sys, field));
  const ComplexMatrix perp =
      eig.vectors.adjoint() * perpendicularSpinOperator(sys, field.polarDeg) * eig.vectors;
  const int dim = sys.multiplicity();
  TransitionSet out;
  out.reserve(dim * (dim - 1) / 2);
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      Transition t;
      t.levels = {i, j};
      t.frequencyMHz = eig.energiesMHz(j) - eig.energiesMHz(i);
      t.matrixElementSq = std::norm(perp(i, j));
      t.allowed = t.matrixElementSq >= kForbiddenThreshold;
      out.push_back(t);
    }
  }
  return out;
}

double transitionFrequency(const SpinSystem& sys, double polarDeg, double fieldG,
                           LevelPair levels) {
  const ComplexMatrix h = hamiltonian(sys, FieldOrientation{fieldG, polarDeg});
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(levels.upper) - solver.eigenvalues()(levels.lower);
}

std::vector<Resonance> resonanceFields(const SpinSystem& sys, double polarDeg,
                                       double frequencyGHz, FieldInterval range) {
  sys.validate();
  if (!(frequencyGHz > 0.0)) throw std::invalid_argument("microwave frequency must be positive");
  if (!(range.highG > range.lowG) || range.lowG < 0.0) {
    throw std::invalid_argument("field search range must be a non-empty interval in B >= 0");
  }
  const double target = frequencyGHz * 1000.0;
  const int dim = sys.multiplicity();
  const int brackets = static_cast<int>(std::ceil((range.highG - range.lowG) / kBracketWidthG));
  const double step = (range.highG - range.lowG) / brackets;

  // sampled energies on the bracket grid
  std::vector<RealVector> grid(brackets + 1);
  for (int k = 0; k <= brackets; ++k) {
    const double b = (k == brackets) ? range.highG : range.lowG + k * step;
    const ComplexMatrix h = hamiltonian(sys, FieldOrientation{b, polarDeg});
    grid[k] = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues();
  }
  auto gridField = [&](int k) { return k == brackets ? range.highG : range.lowG + k * step; };

  std::vector<Resonance> out;
  auto accept = [&](double field, LevelPair levels) {
    for (const Transition& t : transitions(sys, FieldOrientation{field, polarDeg})) {
      if (t.levels == levels && t.allowed) {
        out.push_back({field, levels, t.matrixElementSq});
      }
    }
  };

  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      const LevelPair levels{i, j};
      auto mismatch = [&](int k) { return grid[k](j) - grid[k](i) - target; };
      for (int k = 0; k < brackets; ++k) {
        const double v0 = mismatch(k);
        const double v1 = mismatch(k + 1);
        if (v0 == 0.0) {
          accept(gridField(k), levels);
          continue;
        }
        if (v0 * v1 >= 0.0) continue;
        double lo = gridField(k), hi = gridField(k + 1);
        double flo = v0;
        while (hi - lo > kBisectionToleranceG) {
          const double mid = 0.5 * (lo + hi);
          const double fmid = transitionFrequency(sys, polarDeg, mid, levels) - target;
          if (fmid == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
          } else {
            hi = mid;
          }
        }
        accept(0.5 * (lo + hi), levels);
      }
      if (mismatch(brackets) == 0.0) accept(range.highG, levels);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Resonance& a, const Resonance& b) { return a.fieldG < b.fieldG; });
  return out;
}

double fieldFrequencyConversion(double deltaMHz, double g) {
  if (!(g > 0.0)) throw std::invalid_argument("g factor must be positive");
  return deltaMHz / (g * kBohrMHzPerGauss);
}

}  // namespace v2sim
