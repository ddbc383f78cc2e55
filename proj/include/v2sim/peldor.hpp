#pragma once

#include "v2sim/pulse_engine.hpp"
#include "v2sim/pump_relax.hpp"
#include "v2sim/spectrum.hpp"
#include "v2sim/spin_core.hpp"

#include <string>
#include <vector>

namespace v2sim {

/// Lorentzian power transmission of the microwave resonator.
struct ResonatorProfile {
  double centerGHz = 9.308;
  double fwhmMHz = 100.0;

  void validate() const;
};

/// 1 / (1 + (2 (f - f0) / fwhm)^2)
double resonatorTransmission(const ResonatorProfile& profile, double frequencyGHz);

/// Spin species flipped by the pump pulse. Its line is Gaussian with the given FWHM.
struct PartnerSpecies {
  std::string label;
  double lineCenterGHz = 9.308;
  double lineWidthMHz = 8.4;
  double depth = 0.3;          ///< driven-decoherence depth lambda, in [0, 1]
  double nutationFactor = 1.0; ///< nutation frequency relative to a spin-1/2 at the same B1

  void validate() const;
};

/// Partner whose line sits offsetG above (positive) a reference line at the working
/// field; a higher resonance field maps to a lower pump frequency.
PartnerSpecies partnerFromFieldOffset(std::string label, double referenceGHz, double offsetG,
                                      double g, double lineWidthMHz, double depth);

/// Rectangular pump pulse; the flip angle applies at the resonator centre for nutationFactor 1.
struct PumpPulse {
  double durationNs = 64.0;
  double flipAngleDeg = 180.0;
};

/// Flip probability of a rectangular pulse with nutation nu1 at detuning delta (MHz).
double rectangularFlipProbability(double nu1MHz, double detuningMHz, double durationUs);

/// Average flip probability over the partner line at pump frequency fp.
double pumpExcitationProbability(const PartnerSpecies& partner, double fpGHz,
                                 const PumpPulse& pulse, const ResonatorProfile& resonator);

enum class EchoKind { Stimulated, Refocused };
enum class OpticalMode { Continuous, PulsedPrelude };

EchoKind parseEchoKind(const std::string& name);
OpticalMode parseOpticalMode(const std::string& name);

struct DeerSweepConfig {
  double fsGHz = 9.308;
  double fpStartGHz = 9.15;
  double fpStopGHz = 9.4;     ///< exclusive
  double stepMHz = 1.0;
  PumpPulse pump;
  EchoKind echoKind = EchoKind::Stimulated;
  OpticalMode opticalMode = OpticalMode::Continuous;
  double stimulatedToRefocusedRatio = 2.0;  ///< > 1
  double sequenceLengthUs = 2.4;            ///< total dephasing time entering E0
  double preludeUs = 900.0;
  double preludeGapUs = 20.0;

  void validate() const;
  std::vector<double> pumpFrequenciesGHz() const;
};

struct DeerProbe {
  SpinSystem system;
  LevelPair probed{2, 3};
  double selfDepth = 0.5;  ///< lambda of the probe species pumping itself at fs
};

struct DeerSweepResult {
  Spectrum spectrum;  ///< frequency axis in MHz
  double e0 = 0.0;
  std::vector<PartnerSpecies> species;  ///< self first, then the given partners
  std::vector<std::string> diagnostics;
};

/// echo(fp) = E0 * prod_s (1 - lambda_s P_s(fp)).
DeerSweepResult deerSweep(const DeerSweepConfig& config, const DeerProbe& probe,
                          const std::vector<PartnerSpecies>& partners,
                          const ResonatorProfile& resonator, const RelaxationParams& relaxation,
                          const PumpModel& pump);

struct Dip {
  double centerGHz = 0.0;
  double depth = 0.0;
};

/// Local minima with topographic prominence above the threshold, refined with a
/// three-point parabola. The spectrum axis is in MHz.
std::vector<Dip> dipDetect(const Spectrum& spectrum, double prominenceThreshold);

}  // namespace v2sim
