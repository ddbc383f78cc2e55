#include "v2sim/spectrum.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace v2sim {

std::string axisName(AxisKind kind) {
  switch (kind) {
    case AxisKind::FieldG: return "field_G";
    case AxisKind::FrequencyMHz: return "frequency_MHz";
    case AxisKind::AngleDeg: return "angle_deg";
    case AxisKind::TimeUs: return "time_us";
  }
  return "axis";
}

void Spectrum::validate() const {
  if (axis.size() != intensity.size()) {
    throw std::invalid_argument("spectrum axis and intensity lengths differ");
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i]) || !std::isfinite(intensity[i])) {
      throw std::invalid_argument("spectrum contains non-finite values");
    }
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw std::invalid_argument("spectrum axis must be strictly increasing");
    }
  }
}

std::string formatMetaNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace needs at least two points");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

double LineShape::operator()(double x) const {
  if (!(widthPP > 0.0)) throw std::invalid_argument("line width must be positive");
  switch (kind) {
    case LineShapeKind::LorentzianAbsorption: {
      const double hwhm = 0.5 * std::sqrt(3.0) * widthPP;
      const double u = x / hwhm;
      return 1.0 / (1.0 + u * u);
    }
    case LineShapeKind::LorentzianDerivative: {
      // -dL/dx, extrema at x = -+widthPP/2 with values +-9/(8 sqrt3 hwhm)
      const double hwhm = 0.5 * std::sqrt(3.0) * widthPP;
      const double u = x / hwhm;
      const double d = 1.0 + u * u;
      const double slope = -2.0 * u / (hwhm * d * d);
      const double peakToPeak = 2.0 * 9.0 / (8.0 * std::sqrt(3.0) * hwhm);
      return slope / peakToPeak;
    }
    case LineShapeKind::GaussianAbsorption: {
      const double sigma = 0.5 * widthPP;
      return std::exp(-0.5 * x * x / (sigma * sigma));
    }
    case LineShapeKind::GaussianDerivative: {
      const double sigma = 0.5 * widthPP;
      const double slope = -x / (sigma * sigma) * std::exp(-0.5 * x * x / (sigma * sigma));
      const double peakToPeak = 2.0 * std::exp(-0.5) / sigma;
      return slope / peakToPeak;
    }
  }
  return 0.0;
}

bool LineShape::isDerivative() const {
  return kind == LineShapeKind::LorentzianDerivative || kind == LineShapeKind::GaussianDerivative;
}

LineShape LineShape::absorption() const {
  switch (kind) {
    case LineShapeKind::LorentzianDerivative: return {LineShapeKind::LorentzianAbsorption, widthPP};
    case LineShapeKind::GaussianDerivative: return {LineShapeKind::GaussianAbsorption, widthPP};
    default: return *this;
  }
}

LineShape LineShape::derivative() const {
  switch (kind) {
    case LineShapeKind::LorentzianAbsorption: return {LineShapeKind::LorentzianDerivative, widthPP};
    case LineShapeKind::GaussianAbsorption: return {LineShapeKind::GaussianDerivative, widthPP};
    default: return *this;
  }
}

LineShapeKind parseLineShapeKind(const std::string& name) {
  if (name == "lorentzianDerivative") return LineShapeKind::LorentzianDerivative;
  if (name == "gaussianDerivative") return LineShapeKind::GaussianDerivative;
  if (name == "lorentzianAbsorption") return LineShapeKind::LorentzianAbsorption;
  if (name == "gaussianAbsorption") return LineShapeKind::GaussianAbsorption;
  throw std::invalid_argument("unknown line shape '" + name + "'");
}

std::string lineShapeName(LineShapeKind kind) {
  switch (kind) {
    case LineShapeKind::LorentzianDerivative: return "lorentzianDerivative";
    case LineShapeKind::GaussianDerivative: return "gaussianDerivative";
    case LineShapeKind::LorentzianAbsorption: return "lorentzianAbsorption";
    case LineShapeKind::GaussianAbsorption: return "gaussianAbsorption";
  }
  return "";
}

}  // namespace v2sim
