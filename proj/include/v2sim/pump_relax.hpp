#pragma once

#include "v2sim/spectrum.hpp"
#include "v2sim/spin_core.hpp"

#include <vector>

namespace v2sim {

/// Occupation probabilities ordered by descending m_S (index 0 is m_S = +S).
struct PopulationState {
  std::vector<double> p;
  double timestampUs = 0.0;

  void validate() const;
  /// Population of level k in ascending-energy order (adiabatic high-field labels).
  double level(int k) const { return p[p.size() - 1 - k]; }
};

/// Lower-minus-upper population difference of a level pair.
double populationDifference(const PopulationState& state, LevelPair levels);

/// High-temperature Boltzmann populations, p proportional to 1 - E/kT.
PopulationState thermalPopulations(const SpinSystem& sys, const FieldOrientation& field,
                                   double temperatureK);

PopulationState uniformPopulations(int multiplicity);

enum class PumpPolarity {
  IntoHalf,         ///< optical cycle feeds m_S = +-1/2
  IntoThreeHalves,  ///< reversed sign convention
};

PumpPolarity parsePumpPolarity(const std::string& name);

struct PumpModel {
  double epsilon = 0.05;   ///< polarization amplitude, 0 <= epsilon <= 1/4
  double topUs = 139.0;    ///< bare optical pumping time
  double t1Us = 354.0;
  double temperatureK = 300.0;
  PumpPolarity polarity = PumpPolarity::IntoHalf;
  PopulationState thermal;  ///< lattice fixed point

  void validate() const;
  /// Fixed point of the optical cycle alone: [1/4-e, 1/4+e, 1/4+e, 1/4-e] for S=3/2 with a
  /// uniform lattice state; in general (1 - 4e) * thermal + 4e * [0, 1/2, 1/2, 0].
  PopulationState pumpSteadyState() const;
  /// Fixed point of optical + lattice rates under illumination.
  PopulationState illuminatedFixedPoint() const;
  /// 1/Top_eff = 1/Top + 1/T1
  double effectivePumpTimeUs() const;
};

/// Model with its thermal reference computed at the given field.
PumpModel makePumpModel(const SpinSystem& sys, const FieldOrientation& field, double epsilon,
                        double topUs, double t1Us, double temperatureK = 300.0,
                        PumpPolarity polarity = PumpPolarity::IntoHalf);

/// Exact propagation over dt under constant illumination.
PopulationState evolvePopulations(const PopulationState& state, const PumpModel& model,
                                  bool lightOn, double dtUs);

/// Bare optical time recovered from the illuminated and dark time constants.
double bareOpticalTimeUs(double effectiveUs, double t1Us);

struct RecoveryTiming {
  double sweepStartUs = 0.0;     ///< system is thermal here; no echo may precede it
  double lightStartUs = 200.0;
  double lightDurationUs = 1000.0;
  LevelPair probed{2, 3};
};

/// Population difference of the probed transition at each echo position, the
/// echo sequence being translated through a fixed optical pulse.
Spectrum echoDetectedRecoveryTrace(const PumpModel& model, const RecoveryTiming& timing,
                                   const std::vector<double>& delaysUs);

}  // namespace v2sim
