#include "v2sim/pump_relax.hpp"

#include "v2sim/units.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace v2sim {

void PopulationState::validate() const {
  if (p.size() < 2) throw std::invalid_argument("population vector needs at least two levels");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -1e-15)) throw std::invalid_argument("populations must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("populations must sum to 1");
}

double populationDifference(const PopulationState& state, LevelPair levels) {
  const int n = static_cast<int>(state.p.size());
  if (levels.lower < 0 || levels.upper >= n || levels.lower >= levels.upper) {
    throw std::invalid_argument("level pair out of range");
  }
  return state.level(levels.lower) - state.level(levels.upper);
}

PopulationState thermalPopulations(const SpinSystem& sys, const FieldOrientation& field,
                                   double temperatureK) {
  if (!(temperatureK > 0.0)) throw std::invalid_argument("temperature must be positive");
  const EigenSystem eig = diagonalize(hamiltonian(sys, field));
  const int n = sys.multiplicity();
  const double kT = kBoltzmannMHzPerKelvin * temperatureK;
  PopulationState out;
  out.p.resize(n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = 1.0 - eig.energiesMHz(k) / kT;
    out.p[n - 1 - k] = w;
    sum += w;
  }
  for (double& v : out.p) v /= sum;
  return out;
}

PopulationState uniformPopulations(int multiplicity) {
  return PopulationState{std::vector<double>(multiplicity, 1.0 / multiplicity), 0.0};
}

PumpPolarity parsePumpPolarity(const std::string& name) {
  if (name == "intoHalf") return PumpPolarity::IntoHalf;
  if (name == "intoThreeHalves") return PumpPolarity::IntoThreeHalves;
  throw std::invalid_argument("unknown pump polarity '" + name + "'");
}

void PumpModel::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 0.25)) {
    throw std::invalid_argument("pump polarization epsilon must lie in [0, 1/4]");
  }
  if (!(topUs > 0.0)) throw std::invalid_argument("Top must be positive");
  if (!(t1Us > 0.0)) throw std::invalid_argument("T1 must be positive");
  thermal.validate();
}

PopulationState PumpModel::pumpSteadyState() const {
  const int n = static_cast<int>(thermal.p.size());
  const double spin = 0.5 * (n - 1);
  std::vector<bool> favoured(n);
  int nFavoured = 0;
  for (int i = 0; i < n; ++i) {
    const double m = std::abs(spin - i);
    const bool half = std::abs(m - 0.5) < 1e-9;
    favoured[i] = (polarity == PumpPolarity::IntoHalf) ? half : !half;
    nFavoured += favoured[i] ? 1 : 0;
  }
  PopulationState out = thermal;
  const int nOther = n - nFavoured;
  if (nFavoured == 0 || nOther == 0) return out;
  // Mix of the lattice state and complete pumping into the favoured levels, so
  // that epsilon = 0 leaves the thermal state alone and a uniform reference gives
  // 1/n +- epsilon.
  const double full = static_cast<double>(nOther) / (n * nFavoured);
  const double w = epsilon / full;
  for (int i = 0; i < n; ++i) {
    const double target = favoured[i] ? 1.0 / nFavoured : 0.0;
    out.p[i] = (1.0 - w) * thermal.p[i] + w * target;
  }
  return out;
}

double PumpModel::effectivePumpTimeUs() const { return 1.0 / (1.0 / topUs + 1.0 / t1Us); }

PopulationState PumpModel::illuminatedFixedPoint() const {
  const PopulationState optical = pumpSteadyState();
  const double teff = effectivePumpTimeUs();
  PopulationState out = optical;
  for (std::size_t i = 0; i < out.p.size(); ++i) {
    out.p[i] = teff * (optical.p[i] / topUs + thermal.p[i] / t1Us);
  }
  return out;
}

PumpModel makePumpModel(const SpinSystem& sys, const FieldOrientation& field, double epsilon,
                        double topUs, double t1Us, double temperatureK, PumpPolarity polarity) {
  PumpModel model;
  model.epsilon = epsilon;
  model.topUs = topUs;
  model.t1Us = t1Us;
  model.temperatureK = temperatureK;
  model.polarity = polarity;
  model.thermal = thermalPopulations(sys, field, temperatureK);
  model.validate();
  return model;
}

PopulationState evolvePopulations(const PopulationState& state, const PumpModel& model,
                                  bool lightOn, double dtUs) {
  if (!(dtUs >= 0.0)) throw std::invalid_argument("time step must be non-negative");
  if (state.p.size() != model.thermal.p.size()) {
    throw std::invalid_argument("population state and pump model dimensions differ");
  }
  const PopulationState target = lightOn ? model.illuminatedFixedPoint() : model.thermal;
  const double tau = lightOn ? model.effectivePumpTimeUs() : model.t1Us;
  const double decay = std::exp(-dtUs / tau);
  PopulationState out = state;
  for (std::size_t i = 0; i < out.p.size(); ++i) {
    out.p[i] = target.p[i] + (state.p[i] - target.p[i]) * decay;
  }
  out.timestampUs = state.timestampUs + dtUs;
  return out;
}

double bareOpticalTimeUs(double effectiveUs, double t1Us) {
  const double rate = 1.0 / effectiveUs - 1.0 / t1Us;
  if (!(rate > 0.0)) {
    throw std::invalid_argument("illuminated time constant must be shorter than T1");
  }
  return 1.0 / rate;
}

Spectrum echoDetectedRecoveryTrace(const PumpModel& model, const RecoveryTiming& timing,
                                   const std::vector<double>& delaysUs) {
  model.validate();
  if (!(timing.lightDurationUs >= 0.0)) {
    throw std::invalid_argument("optical pulse duration must be non-negative");
  }
  if (timing.lightStartUs < timing.sweepStartUs) {
    throw std::invalid_argument("optical pulse starts before the sweep start");
  }
  Spectrum out;
  out.axisKind = AxisKind::TimeUs;
  out.axis = delaysUs;
  out.intensity.reserve(delaysUs.size());

  const double lightEnd = timing.lightStartUs + timing.lightDurationUs;
  PopulationState thermal = model.thermal;
  thermal.timestampUs = timing.sweepStartUs;
  for (double t : delaysUs) {
    if (t < timing.sweepStartUs) {
      throw std::invalid_argument("echo sequence scheduled before the sweep start");
    }
    // piecewise-constant illumination: dark, light, dark
    PopulationState s = thermal;
    const double dark1 = std::min(t, timing.lightStartUs) - timing.sweepStartUs;
    s = evolvePopulations(s, model, false, std::max(0.0, dark1));
    if (t > timing.lightStartUs) {
      s = evolvePopulations(s, model, true, std::min(t, lightEnd) - timing.lightStartUs);
    }
    if (t > lightEnd) s = evolvePopulations(s, model, false, t - lightEnd);
    out.intensity.push_back(populationDifference(s, timing.probed));
  }
  out.meta["Top_us"] = formatMetaNumber(model.topUs);
  out.meta["T1_us"] = formatMetaNumber(model.t1Us);
  out.validate();
  return out;
}

}  // namespace v2sim
