#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace v2sim {

using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Static description of a paramagnetic centre with axial (+ rhombic) zero-field splitting.
struct SpinSystem {
  double spin = 1.5;          ///< S, half-integer or integer
  double g = 2.0028;
  double zfsD = 35.0;         ///< MHz, principal axis along the crystal c axis
  double zfsE = 0.0;          ///< MHz
  double linewidthPP = 3.0;   ///< peak-to-peak linewidth, G
  std::string label = "V2";

  /// 2S+1
  int multiplicity() const;
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct FieldOrientation {
  double magnitudeG = 0.0;
  double polarDeg = 0.0;  ///< angle between field and c axis

  void validate() const;
};

/// Ordered (lower, upper) level indices, levels sorted by ascending energy.
struct LevelPair {
  int lower = 0;
  int upper = 1;
  friend bool operator==(const LevelPair&, const LevelPair&) = default;
};

struct Transition {
  LevelPair levels;
  double frequencyMHz = 0.0;
  double matrixElementSq = 0.0;
  bool allowed = false;
};

using TransitionSet = std::vector<Transition>;

inline constexpr double kForbiddenThreshold = 1e-6;

struct SpinOperators {
  ComplexMatrix sx, sy, sz;
};

/// Angular momentum matrices in the |S, m> basis with m descending from S to -S.
SpinOperators spinOperators(double spin);

/// Spin Hamiltonian (MHz) for an arbitrary field vector (G) in crystal axes, z = c.
ComplexMatrix hamiltonian(const SpinSystem& sys, const Eigen::Vector3d& fieldG);
ComplexMatrix hamiltonian(const SpinSystem& sys, const FieldOrientation& field);

/// Operator perpendicular to the static field in the plane containing c.
ComplexMatrix perpendicularSpinOperator(const SpinSystem& sys, double polarDeg);

/// Eigen decomposition sorted by ascending energy. Eigenvector phases are
/// fixed so the largest component of each vector is real and positive.
struct EigenSystem {
  RealVector energiesMHz;
  ComplexMatrix vectors;  ///< columns are eigenvectors
};

EigenSystem diagonalize(const ComplexMatrix& h);

TransitionSet transitions(const SpinSystem& sys, const FieldOrientation& field);

/// Frequency (MHz) of one level pair at a given field.
double transitionFrequency(const SpinSystem& sys, double polarDeg, double fieldG,
                           LevelPair levels);

struct Resonance {
  double fieldG = 0.0;
  LevelPair levels;
  double matrixElementSq = 0.0;
};

struct FieldInterval {
  double lowG = 0.0;
  double highG = 0.0;
};

/// All resonance fields in range for allowed transitions, sorted ascending.
std::vector<Resonance> resonanceFields(const SpinSystem& sys, double polarDeg,
                                       double frequencyGHz, FieldInterval range);

/// Field offset (G) equivalent to a frequency offset (MHz) at fixed g.
double fieldFrequencyConversion(double deltaMHz, double g);

/// Adiabatic high-field label m_S of level k (ascending energy, g > 0).
double levelProjection(const SpinSystem& sys, int level);

}  // namespace v2sim
