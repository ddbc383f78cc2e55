#pragma once

#include "v2sim/pump_relax.hpp"
#include "v2sim/spectrum.hpp"
#include "v2sim/spin_core.hpp"

#include <optional>
#include <vector>

namespace v2sim {

struct CwSettings {
  LineShape shape{LineShapeKind::LorentzianDerivative, 3.0};
  /// Fixed level populations; thermal populations at each resonance field when empty.
  std::optional<PopulationState> populations;
  double temperatureK = 300.0;
};

/// Intensity unit: thermal population difference times the matrix element of
/// the central transition at theta = 0, for the same frequency and temperature.
double cwNormalization(const SpinSystem& sys, double frequencyGHz, double temperatureK);

/// Resonance weights: matrixElementSq * (p_lower - p_upper) / normalization.
std::vector<double> resonanceWeights(const SpinSystem& sys, double polarDeg,
                                     double frequencyGHz, const std::vector<Resonance>& lines,
                                     const CwSettings& settings);

Spectrum fieldSweep(const SpinSystem& sys, double polarDeg, double frequencyGHz,
                    FieldInterval range, std::size_t nPoints, const CwSettings& settings);

struct AngleResonances {
  double polarDeg = 0.0;
  std::vector<Resonance> lines;
};

struct RotationalPattern {
  std::vector<Spectrum> spectra;  ///< one per angle, meta carries theta_deg
  std::vector<AngleResonances> positions;
};

RotationalPattern rotationalPattern(const SpinSystem& sys, double frequencyGHz,
                                    const std::vector<double>& anglesDeg, FieldInterval range,
                                    std::size_t nPoints, const CwSettings& settings);

}  // namespace v2sim
