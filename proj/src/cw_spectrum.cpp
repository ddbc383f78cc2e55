#include "v2sim/cw_spectrum.hpp"

#include "v2sim/units.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace v2sim {

double cwNormalization(const SpinSystem& sys, double frequencyGHz, double temperatureK) {
  sys.validate();
  const int n = sys.multiplicity();
  // central transition m -> m-1 with m = 1/2 (half-integer) or 1 (integer)
  const double m = (n % 2 == 0) ? 0.5 : 1.0;
  const double elementSq = (sys.spin * (sys.spin + 1.0) - m * (m - 1.0)) / 4.0;
  const double deltaP = frequencyGHz * 1000.0 / (kBoltzmannMHzPerKelvin * temperatureK * n);
  return elementSq * deltaP;
}

std::vector<double> resonanceWeights(const SpinSystem& sys, double polarDeg,
                                     double frequencyGHz, const std::vector<Resonance>& lines,
                                     const CwSettings& settings) {
  const double norm = cwNormalization(sys, frequencyGHz, settings.temperatureK);
  if (settings.populations) {
    settings.populations->validate();
    if (static_cast<int>(settings.populations->p.size()) != sys.multiplicity()) {
      throw std::invalid_argument("population vector does not match the spin multiplicity");
    }
  }
  std::vector<double> out;
  out.reserve(lines.size());
  for (const Resonance& r : lines) {
    const PopulationState pops =
        settings.populations
            ? *settings.populations
            : thermalPopulations(sys, FieldOrientation{r.fieldG, polarDeg}, settings.temperatureK);
    out.push_back(r.matrixElementSq * populationDifference(pops, r.levels) / norm);
  }
  return out;
}

Spectrum fieldSweep(const SpinSystem& sys, double polarDeg, double frequencyGHz,
                    FieldInterval range, std::size_t nPoints, const CwSettings& settings) {
  if (nPoints < 2) throw std::invalid_argument("field sweep needs at least two points");
  FieldOrientation{0.0, polarDeg}.validate();
  const std::vector<Resonance> lines = resonanceFields(sys, polarDeg, frequencyGHz, range);
  const std::vector<double> weights = resonanceWeights(sys, polarDeg, frequencyGHz, lines, settings);

  Spectrum out;
  out.axisKind = AxisKind::FieldG;
  out.axis = linspace(range.lowG, range.highG, nPoints);
  out.intensity.assign(nPoints, 0.0);
  for (std::size_t i = 0; i < nPoints; ++i) {
    double acc = 0.0;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      acc += weights[l] * settings.shape(out.axis[i] - lines[l].fieldG);
    }
    out.intensity[i] = acc;
  }
  out.meta["fMW_GHz"] = formatMetaNumber(frequencyGHz);
  out.meta["theta_deg"] = formatMetaNumber(polarDeg);
  out.meta["temperature_K"] = formatMetaNumber(settings.temperatureK);
  out.meta["pump"] = settings.populations ? "on" : "off";
  out.meta["lineshape"] = lineShapeName(settings.shape.kind);
  out.validate();
  return out;
}

RotationalPattern rotationalPattern(const SpinSystem& sys, double frequencyGHz,
                                    const std::vector<double>& anglesDeg, FieldInterval range,
                                    std::size_t nPoints, const CwSettings& settings) {
  RotationalPattern out;
  out.spectra.reserve(anglesDeg.size());
  out.positions.reserve(anglesDeg.size());
  for (double theta : anglesDeg) {
    if (!(theta >= 0.0 && theta <= 90.0)) {
      throw std::invalid_argument("rotational pattern angles must lie in [0, 90] degrees");
    }
    out.spectra.push_back(fieldSweep(sys, theta, frequencyGHz, range, nPoints, settings));
    out.positions.push_back({theta, resonanceFields(sys, theta, frequencyGHz, range)});
  }
  return out;
}

}  // namespace v2sim
