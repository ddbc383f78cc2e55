#include "v2sim/peldor.hpp"

#include "v2sim/quadrature.hpp"
#include "v2sim/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace v2sim {

namespace {

constexpr int kLineIntervals = 512;  // Simpson intervals over +-6 sigma
constexpr double kLineHalfSpanSigma = 6.0;

}  // namespace

void ResonatorProfile::validate() const {
  if (!(fwhmMHz > 0.0)) throw std::invalid_argument("resonator fwhm must be positive");
  if (!(centerGHz > 0.0)) throw std::invalid_argument("resonator centre must be positive");
}

double resonatorTransmission(const ResonatorProfile& profile, double frequencyGHz) {
  profile.validate();
  const double u = 2.0 * (frequencyGHz - profile.centerGHz) * 1000.0 / profile.fwhmMHz;
  return 1.0 / (1.0 + u * u);
}

void PartnerSpecies::validate() const {
  if (!(depth >= 0.0 && depth <= 1.0)) throw std::invalid_argument("partner depth must lie in [0, 1]");
  if (!(lineWidthMHz > 0.0)) throw std::invalid_argument("partner line width must be positive");
  if (!(nutationFactor > 0.0)) throw std::invalid_argument("nutation factor must be positive");
}

PartnerSpecies partnerFromFieldOffset(std::string label, double referenceGHz, double offsetG,
                                      double g, double lineWidthMHz, double depth) {
  PartnerSpecies p;
  p.label = std::move(label);
  p.lineCenterGHz = referenceGHz - larmorMHz(g, offsetG) / 1000.0;
  p.lineWidthMHz = lineWidthMHz;
  p.depth = depth;
  p.validate();
  return p;
}

double rectangularFlipProbability(double nu1MHz, double detuningMHz, double durationUs) {
  const double omega2 = nu1MHz * nu1MHz + detuningMHz * detuningMHz;
  if (omega2 == 0.0) return 0.0;
  const double s = std::sin(kPi * std::sqrt(omega2) * durationUs);
  return nu1MHz * nu1MHz / omega2 * s * s;
}

double pumpExcitationProbability(const PartnerSpecies& partner, double fpGHz,
                                 const PumpPulse& pulse, const ResonatorProfile& resonator) {
  partner.validate();
  if (!(pulse.durationNs > 0.0)) throw std::invalid_argument("pump pulse length must be positive");
  const double t = pulse.durationNs * 1e-3;
  // rotation angle 2 pi nu1 t equals the flip angle at the resonator centre
  const double nu1Center = pulse.flipAngleDeg / 360.0 / t;
  const double nu1 = nu1Center * partner.nutationFactor *
                     std::sqrt(resonatorTransmission(resonator, fpGHz));
  const double sigma = partner.lineWidthMHz / kFwhmPerSigma;
  const double centerOffset = (partner.lineCenterGHz - fpGHz) * 1000.0;

  const double h = 2.0 * kLineHalfSpanSigma * sigma / kLineIntervals;
  double acc = 0.0, norm = 0.0;
  for (int i = 0; i <= kLineIntervals; ++i) {
    const double x = -kLineHalfSpanSigma * sigma + i * h;
    const double simpson = (i == 0 || i == kLineIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double w = simpson * std::exp(-0.5 * x * x / (sigma * sigma));
    acc += w * rectangularFlipProbability(nu1, centerOffset + x, t);
    norm += w;
  }
  return acc / norm;
}

EchoKind parseEchoKind(const std::string& name) {
  if (name == "stimulated") return EchoKind::Stimulated;
  if (name == "refocused") return EchoKind::Refocused;
  throw std::invalid_argument("unknown echo kind '" + name + "'");
}

OpticalMode parseOpticalMode(const std::string& name) {
  if (name == "continuous") return OpticalMode::Continuous;
  if (name == "pulsedPrelude") return OpticalMode::PulsedPrelude;
  throw std::invalid_argument("unknown optical mode '" + name + "'");
}

void DeerSweepConfig::validate() const {
  if (!(stepMHz > 0.0)) throw std::invalid_argument("sweep step must be positive");
  if (pumpFrequenciesGHz().size() < 2) {
    throw std::invalid_argument("pump frequency range must hold at least two points");
  }
  if (!(stimulatedToRefocusedRatio > 1.0)) {
    throw std::invalid_argument("stimulated echo must be larger than the refocused echo");
  }
  if (!(pump.durationNs > 0.0)) throw std::invalid_argument("pump pulse length must be positive");
}

std::vector<double> DeerSweepConfig::pumpFrequenciesGHz() const {
  std::vector<double> out;
  const double spanMHz = (fpStopGHz - fpStartGHz) * 1000.0;
  if (!(spanMHz > 0.0) || !(stepMHz > 0.0)) return out;
  const auto n = static_cast<std::size_t>(std::floor(spanMHz / stepMHz + 1e-9));
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(fpStartGHz + static_cast<double>(i) * stepMHz / 1000.0);
  }
  return out;
}

DeerSweepResult deerSweep(const DeerSweepConfig& config, const DeerProbe& probe,
                          const std::vector<PartnerSpecies>& partners,
                          const ResonatorProfile& resonator, const RelaxationParams& relaxation,
                          const PumpModel& pump) {
  config.validate();
  resonator.validate();
  relaxation.validate();
  pump.validate();
  DeerSweepResult result;
  if (std::abs(config.fsGHz - resonator.centerGHz) * 1000.0 > 0.5 * resonator.fwhmMHz) {
    result.diagnostics.push_back("warning: fs lies outside the resonator half-power band");
  }

  PopulationState pops = pump.illuminatedFixedPoint();
  if (config.opticalMode == OpticalMode::PulsedPrelude) {
    pops = evolvePopulations(pump.thermal, pump, true, config.preludeUs);
    pops = evolvePopulations(pops, pump, false, config.preludeGapUs);
  }
  const double kind =
      config.echoKind == EchoKind::Stimulated ? config.stimulatedToRefocusedRatio : 1.0;
  result.e0 = std::abs(populationDifference(pops, probe.probed)) * kind *
              std::exp(-config.sequenceLengthUs / relaxation.t2Us);

  PartnerSpecies self;
  self.label = "self";
  self.lineCenterGHz = config.fsGHz;
  self.lineWidthMHz = larmorMHz(probe.system.g, probe.system.linewidthPP);
  self.depth = probe.selfDepth;
  result.species.push_back(self);
  for (const PartnerSpecies& p : partners) {
    p.validate();
    result.species.push_back(p);
  }

  Spectrum& sp = result.spectrum;
  sp.axisKind = AxisKind::FrequencyMHz;
  for (double fp : config.pumpFrequenciesGHz()) {
    double echo = result.e0;
    for (const PartnerSpecies& s : result.species) {
      echo *= 1.0 - s.depth * pumpExcitationProbability(s, fp, config.pump, resonator);
    }
    sp.axis.push_back(fp * 1000.0);
    sp.intensity.push_back(echo);
  }
  sp.meta["fs_GHz"] = formatMetaNumber(config.fsGHz);
  sp.meta["resonator_center_GHz"] = formatMetaNumber(resonator.centerGHz);
  sp.meta["resonator_fwhm_MHz"] = formatMetaNumber(resonator.fwhmMHz);
  sp.meta["echo_kind"] = config.echoKind == EchoKind::Stimulated ? "stimulated" : "refocused";
  sp.meta["optical_mode"] =
      config.opticalMode == OpticalMode::Continuous ? "continuous" : "pulsedPrelude";
  sp.meta["E0"] = formatMetaNumber(result.e0);
  sp.validate();
  return result;
}

std::vector<Dip> dipDetect(const Spectrum& spectrum, double prominenceThreshold) {
  spectrum.validate();
  const auto& x = spectrum.axis;
  const auto& y = spectrum.intensity;
  const std::size_t n = y.size();
  std::vector<Dip> out;
  if (n < 3) return out;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] < y[i - 1] && y[i] <= y[i + 1])) continue;
    // walk outward until a lower sample appears, tracking the highest point
    double leftMax = y[i];
    for (std::size_t j = i; j-- > 0;) {
      if (y[j] < y[i]) break;
      leftMax = std::max(leftMax, y[j]);
    }
    double rightMax = y[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (y[j] < y[i]) break;
      rightMax = std::max(rightMax, y[j]);
    }
    // parabola through the three samples around the minimum
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0);  // a in a x^2 + b x + c
    double xmin = x1, ymin = y1;
    if (curvature > 0.0) {
      const double b = d01 - curvature * (x0 + x1);
      xmin = std::clamp(-b / (2.0 * curvature), x0, x2);
      ymin = y0 + d01 * (xmin - x0) + curvature * (xmin - x0) * (xmin - x1);
    }
    const double prominence = std::min(leftMax, rightMax) - ymin;
    if (prominence > prominenceThreshold) out.push_back({xmin / 1000.0, prominence});
  }
  return out;
}

}  // namespace v2sim
