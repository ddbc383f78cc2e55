#pragma once

#include <map>
#include <string>
#include <vector>

namespace v2sim {

enum class AxisKind { FieldG, FrequencyMHz, AngleDeg, TimeUs };

std::string axisName(AxisKind kind);

/// Sampled 1-D trace with acquisition metadata.
struct Spectrum {
  AxisKind axisKind = AxisKind::FieldG;
  std::vector<double> axis;
  std::vector<double> intensity;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return axis.size(); }
  /// Throws std::invalid_argument unless the axis is strictly increasing,
  /// lengths agree and all values are finite.
  void validate() const;
};

/// Shortest round-trip-safe text for a metadata value (%.10g).
std::string formatMetaNumber(double v);

/// n evenly spaced samples over [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t n);

enum class LineShapeKind {
  LorentzianDerivative,
  GaussianDerivative,
  LorentzianAbsorption,
  GaussianAbsorption,
};

/// Line shape parameterised by the peak-to-peak width of its first derivative.
/// Derivative shapes are scaled to unit peak-to-peak amplitude, absorption
/// shapes to unit peak height. Derivative lobes are positive below the centre.
struct LineShape {
  LineShapeKind kind = LineShapeKind::LorentzianDerivative;
  double widthPP = 3.0;

  double operator()(double offset) const;
  bool isDerivative() const;
  /// Returns the absorption counterpart (same width).
  LineShape absorption() const;
  LineShape derivative() const;
};

LineShapeKind parseLineShapeKind(const std::string& name);
std::string lineShapeName(LineShapeKind kind);

}  // namespace v2sim
