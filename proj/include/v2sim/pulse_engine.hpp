#pragma once

#include "v2sim/cw_spectrum.hpp"
#include "v2sim/pump_relax.hpp"
#include "v2sim/spectrum.hpp"
#include "v2sim/spin_core.hpp"

#include <complex>
#include <optional>
#include <variant>
#include <vector>

namespace v2sim {

enum class Channel { Probe, Pump };

/// Rectangular microwave pulse. Exactly one of b1G / attenuationDb is used;
/// attenuation needs a reference B1 in the frame settings.
struct MwPulse {
  Channel channel = Channel::Probe;
  double durationNs = 0.0;
  std::optional<double> b1G;
  std::optional<double> attenuationDb;
  double phaseDeg = 0.0;
};

struct Delay {
  double durationUs = 0.0;
};

struct OpticalPulse {
  double durationUs = 0.0;
};

struct AcquireEcho {
  double windowUs = 0.0;
};

using PulseEvent = std::variant<MwPulse, Delay, OpticalPulse, AcquireEcho>;

struct PulseSequence {
  std::vector<PulseEvent> events;

  void validate(bool requireAcquisition = true) const;
};

struct RelaxationParams {
  double t1Us = 354.0;
  double t2Us = 48.0;

  void validate() const;
};

struct FrameSettings {
  double referenceGHz = 9.308;            ///< probe channel / frame frequency
  std::optional<double> pumpGHz;          ///< pump channel; defaults to the probe frequency
  LevelPair probed{2, 3};
  bool selective = true;                  ///< probe pulses drive only the probed pair
  std::optional<double> referenceB1G;     ///< B1 at 0 dB attenuation
  double inhomogeneousWidthMHz = 0.0;     ///< FWHM of the Gaussian offset distribution
  int quadratureNodes = 16;
  double temperatureK = 300.0;            ///< sets the relaxation equilibrium
};

/// Rotating frame built on the eigenbasis of the static Hamiltonian. Level k
/// carries the high-field label m_k = -S + k; the frame generator is sum m_k |k><k|.
class RotatingFrame {
 public:
  RotatingFrame(const SpinSystem& sys, const FieldOrientation& field, FrameSettings settings);

  const FrameSettings& settings() const { return settings_; }
  int dimension() const { return static_cast<int>(energies_.size()); }
  const PopulationState& equilibrium() const { return equilibrium_; }
  const RealVector& labels() const { return labels_; }
  double channelGHz(Channel c) const;
  /// Transition frequency of the probed pair minus the frame frequency (MHz).
  double probedDetuningMHz() const;
  /// Diagonal rotating-frame energies (MHz) for a channel and offset.
  RealVector staticDiagonal(Channel c, double offsetMHz) const;
  /// RWA drive operator for nu1 = 1 MHz, phase 0 (upper triangle carries e^{i phi}).
  ComplexMatrix driveOperator(Channel c, double phaseDeg) const;
  double resolveB1G(const MwPulse& pulse) const;
  /// nu1 = g * beta * B1 / 2
  double nutationMHz(double b1G) const;
  /// Length (ns) of a pi rotation of the probed pair at the given B1.
  double piPulseNs(double b1G) const;
  /// B1 giving a pi rotation of the probed pair in the given time.
  double b1ForPiPulse(double durationNs) const;

 private:
  SpinSystem sys_;
  FieldOrientation field_;
  FrameSettings settings_;
  RealVector energies_;
  RealVector labels_;
  ComplexMatrix perp_;  ///< S_perp in the eigenbasis
  PopulationState equilibrium_;
};

struct EnsembleMember {
  double offsetMHz = 0.0;
  double weight = 1.0;
  ComplexMatrix rho;
};

/// Density matrices of an inhomogeneous ensemble in the probe rotating frame.
struct SpinEnsembleState {
  double frameGHz = 0.0;
  double inhomogeneousWidthMHz = 0.0;
  double timeUs = 0.0;
  std::vector<EnsembleMember> members;
};

/// Diagonal state with the given populations for every ensemble member.
SpinEnsembleState prepareState(const RotatingFrame& frame, const PopulationState& populations);

SpinEnsembleState applyPulse(const RotatingFrame& frame, SpinEnsembleState state,
                             const MwPulse& pulse);
/// Coherent free precession in the probe frame.
SpinEnsembleState applyFreeEvolution(const RotatingFrame& frame, SpinEnsembleState state,
                                     double dtUs);
/// Phenomenological T1/T2 relaxation toward the frame equilibrium.
SpinEnsembleState applyRelaxation(const RotatingFrame& frame, SpinEnsembleState state,
                                  const RelaxationParams& params, double dtUs);
/// Illumination: populations follow the pump model, coherences decay with T2.
SpinEnsembleState applyOptical(const RotatingFrame& frame, SpinEnsembleState state,
                               const RelaxationParams& params, const PumpModel& pump,
                               double dtUs);

/// Ensemble average of rho(lower, upper) of the probed pair.
std::complex<double> probedCoherence(const RotatingFrame& frame, const SpinEnsembleState& state);
/// Ensemble-averaged lower-minus-upper population of the probed pair.
double probedPopulationDifference(const RotatingFrame& frame, const SpinEnsembleState& state);

struct EchoRecord {
  double timeUs = 0.0;
  std::complex<double> coherence;
  double populationDifference = 0.0;
};

struct SequenceResult {
  SpinEnsembleState state;
  std::vector<EchoRecord> echoes;
};

/// Runs events in order; delays combine free precession and relaxation.
/// Optical pulses need a pump model.
SequenceResult runSequence(const RotatingFrame& frame, SpinEnsembleState state,
                           const PulseSequence& sequence, const RelaxationParams& params,
                           const PumpModel* pump = nullptr);

/// Dominant oscillation frequency of a sampled trace (MHz for a microsecond axis).
double dominantFrequency(const std::vector<double>& t, const std::vector<double>& y);

struct NutationDrive {
  std::optional<double> b1G;
  std::optional<double> attenuationDb;
};

/// Probed population difference versus nutation pulse length (ns), one trace per
/// drive level. Each trace's meta holds the extracted nutation frequency.
std::vector<Spectrum> rabiTrace(const RotatingFrame& frame, const std::vector<NutationDrive>& drives,
                                const std::vector<double>& tGridNs,
                                const PopulationState& initial);

struct HahnSettings {
  double piHalfNs = 16.0;          ///< pi pulse is twice as long at the same B1
  double opticalPulseUs = 900.0;   ///< zero disables the optical prelude
  double opticalGapUs = 20.0;
};

/// Echo magnitude versus 2 tau. The initial state is thermal, optionally followed by the
/// optical prelude of the pump model.
Spectrum hahnEchoDecay(const RotatingFrame& frame, const RelaxationParams& params,
                       const std::vector<double>& tauGridUs, const HahnSettings& hahn,
                       const PumpModel* pump);

struct EchoSpecies {
  SpinSystem system;
  std::optional<PopulationState> populations;  ///< thermal when empty
  double t2Us = 48.0;
  double weight = 1.0;
};

struct EchoFieldSweep {
  Spectrum spectrum;
  std::vector<Resonance> lines;       ///< all lines, sorted by field
  std::vector<double> amplitudes;     ///< same order as lines
  std::vector<std::size_t> species;   ///< index of the owning species
};

/// Absorption-shaped echo-detected field sweep of several species at a fixed 2 tau.
EchoFieldSweep echoDetectedFieldSweep(const std::vector<EchoSpecies>& species, double polarDeg,
                                      double frequencyGHz, FieldInterval range,
                                      std::size_t nPoints, double twoTauUs,
                                      double temperatureK = 300.0);

}  // namespace v2sim
