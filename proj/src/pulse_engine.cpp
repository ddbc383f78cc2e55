#include "v2sim/pulse_engine.hpp"

#include "v2sim/quadrature.hpp"
#include "v2sim/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace v2sim {

namespace {

using cd = std::complex<double>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ComplexMatrix hermitianPropagator(const ComplexMatrix& h, double dtUs) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  const Eigen::Index n = h.rows();
  Eigen::VectorXcd phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases(i) = std::polar(1.0, -2.0 * kPi * solver.eigenvalues()(i) * dtUs);
  }
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

/// rho_jk -> rho_jk * exp(i * (phase_j - phase_k))
void applyDiagonalPhase(ComplexMatrix& rho, const RealVector& phase) {
  for (Eigen::Index j = 0; j < rho.rows(); ++j) {
    for (Eigen::Index k = 0; k < rho.cols(); ++k) {
      if (j != k) rho(j, k) *= std::polar(1.0, phase(j) - phase(k));
    }
  }
}

}  // namespace

void PulseSequence::validate(bool requireAcquisition) const {
  bool acquires = false;
  for (const PulseEvent& e : events) {
    std::visit(Overloaded{
                   [](const MwPulse& p) {
                     if (!(p.durationNs >= 0.0)) {
                       throw std::invalid_argument("pulse duration must be non-negative");
                     }
                   },
                   [](const Delay& d) {
                     if (!(d.durationUs >= 0.0)) {
                       throw std::invalid_argument("delay must be non-negative");
                     }
                   },
                   [](const OpticalPulse& o) {
                     if (!(o.durationUs >= 0.0)) {
                       throw std::invalid_argument("optical pulse duration must be non-negative");
                     }
                   },
                   [&](const AcquireEcho& a) {
                     if (!(a.windowUs >= 0.0)) {
                       throw std::invalid_argument("acquisition window must be non-negative");
                     }
                     acquires = true;
                   },
               },
               e);
  }
  if (requireAcquisition && !acquires) {
    throw std::invalid_argument("detected sequence needs at least one echo acquisition");
  }
}

void RelaxationParams::validate() const {
  if (!(t1Us > 0.0) || !(t2Us > 0.0)) throw std::invalid_argument("T1 and T2 must be positive");
  if (t2Us > 2.0 * t1Us) throw std::invalid_argument("T2 must not exceed 2 T1");
}

RotatingFrame::RotatingFrame(const SpinSystem& sys, const FieldOrientation& field,
                             FrameSettings settings)
    : sys_(sys), field_(field), settings_(std::move(settings)) {
  sys_.validate();
  field_.validate();
  if (!(settings_.referenceGHz > 0.0)) throw std::invalid_argument("frame frequency must be positive");
  const EigenSystem eig = diagonalize(hamiltonian(sys_, field_));
  energies_ = eig.energiesMHz;
  const int n = dimension();
  if (settings_.probed.lower < 0 || settings_.probed.upper >= n ||
      settings_.probed.lower >= settings_.probed.upper) {
    throw std::invalid_argument("probed level pair out of range");
  }
  labels_.resize(n);
  for (int k = 0; k < n; ++k) labels_(k) = levelProjection(sys_, k);
  perp_ = eig.vectors.adjoint() * perpendicularSpinOperator(sys_, field_.polarDeg) * eig.vectors;
  equilibrium_ = thermalPopulations(sys_, field_, settings_.temperatureK);
  if (std::abs(probedDetuningMHz()) > 0.1 * settings_.referenceGHz * 1000.0) {
    throw std::invalid_argument("probed transition is too far from the frame frequency for the RWA");
  }
}

double RotatingFrame::channelGHz(Channel c) const {
  if (c == Channel::Pump && settings_.pumpGHz) return *settings_.pumpGHz;
  return settings_.referenceGHz;
}

double RotatingFrame::probedDetuningMHz() const {
  const auto [l, u] = settings_.probed;
  return energies_(u) - energies_(l) - settings_.referenceGHz * 1000.0 * (labels_(u) - labels_(l));
}

RealVector RotatingFrame::staticDiagonal(Channel c, double offsetMHz) const {
  const double f = channelGHz(c) * 1000.0;
  return energies_ - (f - offsetMHz) * labels_;
}

ComplexMatrix RotatingFrame::driveOperator(Channel c, double phaseDeg) const {
  const int n = dimension();
  const cd phase = std::polar(1.0, degToRad(phaseDeg));
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  auto couple = [&](int lo, int hi) {
    d(lo, hi) = phase * perp_(lo, hi);
    d(hi, lo) = std::conj(d(lo, hi));
  };
  if (settings_.selective && c == Channel::Probe) {
    couple(settings_.probed.lower, settings_.probed.upper);
  } else {
    for (int k = 0; k + 1 < n; ++k) couple(k, k + 1);
  }
  return d;
}

double RotatingFrame::resolveB1G(const MwPulse& pulse) const {
  if (pulse.b1G) return *pulse.b1G;
  if (pulse.attenuationDb) {
    if (!settings_.referenceB1G) {
      throw std::invalid_argument("attenuation given without a reference B1");
    }
    return *settings_.referenceB1G * std::pow(10.0, -*pulse.attenuationDb / 20.0);
  }
  throw std::invalid_argument("pulse needs either B1 or attenuation");
}

double RotatingFrame::nutationMHz(double b1G) const {
  return sys_.g * kBohrMHzPerGauss * b1G / 2.0;
}

double RotatingFrame::piPulseNs(double b1G) const {
  const double element = std::abs(perp_(settings_.probed.lower, settings_.probed.upper));
  if (!(b1G > 0.0) || element == 0.0) throw std::invalid_argument("probed pair cannot be driven");
  return 1000.0 / (4.0 * nutationMHz(b1G) * element);
}

double RotatingFrame::b1ForPiPulse(double durationNs) const {
  if (!(durationNs > 0.0)) throw std::invalid_argument("pulse length must be positive");
  return piPulseNs(1.0) / durationNs;
}

SpinEnsembleState prepareState(const RotatingFrame& frame, const PopulationState& populations) {
  populations.validate();
  const int n = frame.dimension();
  if (static_cast<int>(populations.p.size()) != n) {
    throw std::invalid_argument("population vector does not match the frame dimension");
  }
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) rho(k, k) = populations.level(k);

  const FrameSettings& s = frame.settings();
  const QuadratureRule rule = gaussianAverage(s.inhomogeneousWidthMHz, s.quadratureNodes);
  SpinEnsembleState state;
  state.frameGHz = s.referenceGHz;
  state.inhomogeneousWidthMHz = s.inhomogeneousWidthMHz;
  state.timeUs = populations.timestampUs;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    state.members.push_back({rule.nodes[i], rule.weights[i], rho});
  }
  return state;
}

SpinEnsembleState applyPulse(const RotatingFrame& frame, SpinEnsembleState state,
                             const MwPulse& pulse) {
  if (!(pulse.durationNs >= 0.0)) throw std::invalid_argument("pulse duration must be non-negative");
  const double dt = pulse.durationNs * 1e-3;
  const double nu1 = frame.nutationMHz(frame.resolveB1G(pulse));
  const ComplexMatrix drive = nu1 * frame.driveOperator(pulse.channel, pulse.phaseDeg);
  const RealVector& labels = frame.labels();
  // phase that takes the probe frame into the channel frame at time t
  const double shiftMHz = (frame.channelGHz(pulse.channel) - frame.settings().referenceGHz) * 1000.0;
  const RealVector toChannelStart = 2.0 * kPi * shiftMHz * state.timeUs * labels;
  const RealVector toProbeEnd = -2.0 * kPi * shiftMHz * (state.timeUs + dt) * labels;

  for (EnsembleMember& m : state.members) {
    ComplexMatrix h = drive;
    h.diagonal() += frame.staticDiagonal(pulse.channel, m.offsetMHz).cast<cd>();
    const ComplexMatrix u = hermitianPropagator(h, dt);
    if (shiftMHz != 0.0) applyDiagonalPhase(m.rho, toChannelStart);
    m.rho = u * m.rho * u.adjoint();
    if (shiftMHz != 0.0) applyDiagonalPhase(m.rho, toProbeEnd);
    m.rho = 0.5 * (m.rho + m.rho.adjoint());
  }
  state.timeUs += dt;
  return state;
}

SpinEnsembleState applyFreeEvolution(const RotatingFrame& frame, SpinEnsembleState state,
                                     double dtUs) {
  if (!(dtUs >= 0.0)) throw std::invalid_argument("evolution time must be non-negative");
  for (EnsembleMember& m : state.members) {
    const RealVector phase = -2.0 * kPi * dtUs * frame.staticDiagonal(Channel::Probe, m.offsetMHz);
    applyDiagonalPhase(m.rho, phase);
  }
  state.timeUs += dtUs;
  return state;
}

SpinEnsembleState applyRelaxation(const RotatingFrame& frame, SpinEnsembleState state,
                                  const RelaxationParams& params, double dtUs) {
  params.validate();
  if (!(dtUs >= 0.0)) throw std::invalid_argument("relaxation time must be non-negative");
  const double longitudinal = std::exp(-dtUs / params.t1Us);
  const double transverse = std::exp(-dtUs / params.t2Us);
  const PopulationState& eq = frame.equilibrium();
  for (EnsembleMember& m : state.members) {
    const Eigen::Index n = m.rho.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (j == k) {
          const double target = eq.level(static_cast<int>(j));
          m.rho(j, j) = target + (m.rho(j, j).real() - target) * longitudinal;
        } else {
          m.rho(j, k) *= transverse;
        }
      }
    }
  }
  return state;
}

SpinEnsembleState applyOptical(const RotatingFrame& frame, SpinEnsembleState state,
                               const RelaxationParams& params, const PumpModel& pump,
                               double dtUs) {
  params.validate();
  if (static_cast<int>(pump.thermal.p.size()) != frame.dimension()) {
    throw std::invalid_argument("pump model dimension does not match the frame");
  }
  const double start = state.timeUs;
  state = applyFreeEvolution(frame, std::move(state), dtUs);
  const double transverse = std::exp(-dtUs / params.t2Us);
  const int n = frame.dimension();
  for (EnsembleMember& m : state.members) {
    PopulationState pops;
    pops.p.resize(n);
    for (int k = 0; k < n; ++k) pops.p[n - 1 - k] = m.rho(k, k).real();
    pops.timestampUs = start;
    const PopulationState after = evolvePopulations(pops, pump, true, dtUs);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (j == k) {
          m.rho(j, j) = after.level(j);
        } else {
          m.rho(j, k) *= transverse;
        }
      }
    }
  }
  return state;
}

std::complex<double> probedCoherence(const RotatingFrame& frame, const SpinEnsembleState& state) {
  const auto [l, u] = frame.settings().probed;
  cd acc = 0.0;
  for (const EnsembleMember& m : state.members) acc += m.weight * m.rho(l, u);
  return acc;
}

double probedPopulationDifference(const RotatingFrame& frame, const SpinEnsembleState& state) {
  const auto [l, u] = frame.settings().probed;
  double acc = 0.0;
  for (const EnsembleMember& m : state.members) {
    acc += m.weight * (m.rho(l, l).real() - m.rho(u, u).real());
  }
  return acc;
}

SequenceResult runSequence(const RotatingFrame& frame, SpinEnsembleState state,
                           const PulseSequence& sequence, const RelaxationParams& params,
                           const PumpModel* pump) {
  sequence.validate(false);
  SequenceResult result;
  for (const PulseEvent& e : sequence.events) {
    std::visit(Overloaded{
                   [&](const MwPulse& p) { state = applyPulse(frame, std::move(state), p); },
                   [&](const Delay& d) {
                     state = applyFreeEvolution(frame, std::move(state), d.durationUs);
                     state = applyRelaxation(frame, std::move(state), params, d.durationUs);
                   },
                   [&](const OpticalPulse& o) {
                     if (!pump) throw std::invalid_argument("optical pulse needs a pump model");
                     state = applyOptical(frame, std::move(state), params, *pump, o.durationUs);
                   },
                   [&](const AcquireEcho&) {
                     result.echoes.push_back({state.timeUs, probedCoherence(frame, state),
                                              probedPopulationDifference(frame, state)});
                   },
               },
               e);
  }
  result.state = std::move(state);
  return result;
}

double dominantFrequency(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 4) {
    throw std::invalid_argument("frequency estimate needs at least four samples");
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double minStep = t.back() - t.front();
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("time grid must be increasing");
    minStep = std::min(minStep, t[i] - t[i - 1]);
  }
  const double span = t.back() - t.front();
  // least-squares sinusoid with free offset: exact for an undamped cosine even
  // when the window holds a non-integer number of periods
  auto power = [&](double f) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double phase = 2.0 * kPi * f * t[i];
      const Eigen::Vector3d v(1.0, std::cos(phase), std::sin(phase));
      a += v * v.transpose();
      b += v * (y[i] - mean);
    }
    return b.dot(a.ldlt().solve(b));
  };
  const double nyquist = 0.5 / minStep;
  const double df = 1.0 / (16.0 * span);
  double best = df, bestPower = -1.0;
  for (double f = df; f <= nyquist; f += df) {
    const double pw = power(f);
    if (pw > bestPower) {
      bestPower = pw;
      best = f;
    }
  }
  // golden-section refinement around the coarse peak
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::max(0.0, best - df), b = best + df;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double pc = power(c), pd = power(d);
  while (b - a > 1e-12 * std::max(1.0, best)) {
    if (pc > pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - ratio * (b - a);
      pc = power(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + ratio * (b - a);
      pd = power(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<Spectrum> rabiTrace(const RotatingFrame& frame, const std::vector<NutationDrive>& drives,
                                const std::vector<double>& tGridNs,
                                const PopulationState& initial) {
  for (std::size_t i = 1; i < tGridNs.size(); ++i) {
    if (!(tGridNs[i] > tGridNs[i - 1])) throw std::invalid_argument("time grid must be increasing");
  }
  const SpinEnsembleState start = prepareState(frame, initial);
  std::vector<Spectrum> out;
  for (const NutationDrive& drive : drives) {
    Spectrum trace;
    trace.axisKind = AxisKind::TimeUs;
    for (double tNs : tGridNs) {
      MwPulse pulse;
      pulse.durationNs = tNs;
      pulse.b1G = drive.b1G;
      pulse.attenuationDb = drive.attenuationDb;
      const SpinEnsembleState s = applyPulse(frame, start, pulse);
      trace.axis.push_back(tNs * 1e-3);
      trace.intensity.push_back(probedPopulationDifference(frame, s));
    }
    MwPulse probe;
    probe.b1G = drive.b1G;
    probe.attenuationDb = drive.attenuationDb;
    trace.meta["B1_G"] = formatMetaNumber(frame.resolveB1G(probe));
    if (drive.attenuationDb) trace.meta["attenuation_dB"] = formatMetaNumber(*drive.attenuationDb);
    trace.meta["nutation_MHz"] = formatMetaNumber(dominantFrequency(trace.axis, trace.intensity));
    trace.validate();
    out.push_back(std::move(trace));
  }
  return out;
}

Spectrum hahnEchoDecay(const RotatingFrame& frame, const RelaxationParams& params,
                       const std::vector<double>& tauGridUs, const HahnSettings& hahn,
                       const PumpModel* pump) {
  params.validate();
  PopulationState initial = frame.equilibrium();
  if (pump && hahn.opticalPulseUs > 0.0) {
    initial = evolvePopulations(pump->thermal, *pump, true, hahn.opticalPulseUs);
    initial = evolvePopulations(initial, *pump, false, hahn.opticalGapUs);
    initial.timestampUs = 0.0;
  }
  const double b1 = frame.b1ForPiPulse(2.0 * hahn.piHalfNs);
  MwPulse piHalf;
  piHalf.durationNs = hahn.piHalfNs;
  piHalf.b1G = b1;
  MwPulse pi = piHalf;
  pi.durationNs = 2.0 * hahn.piHalfNs;

  const SpinEnsembleState start = prepareState(frame, initial);
  Spectrum out;
  out.axisKind = AxisKind::TimeUs;
  for (std::size_t i = 0; i < tauGridUs.size(); ++i) {
    const double tau = tauGridUs[i];
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
    if (i > 0 && !(tau > tauGridUs[i - 1])) throw std::invalid_argument("tau grid must be increasing");
    PulseSequence seq{{piHalf, Delay{tau}, pi, Delay{tau}, AcquireEcho{}}};
    const SequenceResult r = runSequence(frame, start, seq, params);
    out.axis.push_back(2.0 * tau);
    out.intensity.push_back(2.0 * std::abs(r.echoes.front().coherence));
  }
  out.meta["T2_us"] = formatMetaNumber(params.t2Us);
  out.meta["T1_us"] = formatMetaNumber(params.t1Us);
  out.meta["initial_population_difference"] =
      formatMetaNumber(populationDifference(initial, frame.settings().probed));
  out.validate();
  return out;
}

EchoFieldSweep echoDetectedFieldSweep(const std::vector<EchoSpecies>& species, double polarDeg,
                                      double frequencyGHz, FieldInterval range,
                                      std::size_t nPoints, double twoTauUs,
                                      double temperatureK) {
  if (species.empty()) throw std::invalid_argument("field sweep needs at least one species");
  if (!(twoTauUs >= 0.0)) throw std::invalid_argument("2 tau must be non-negative");
  const double reference = cwNormalization(species.front().system, frequencyGHz, temperatureK);

  EchoFieldSweep out;
  std::vector<LineShape> shapes;
  for (std::size_t s = 0; s < species.size(); ++s) {
    const EchoSpecies& sp = species[s];
    if (!(sp.t2Us > 0.0)) throw std::invalid_argument("species T2 must be positive");
    CwSettings cw;
    cw.populations = sp.populations;
    cw.temperatureK = temperatureK;
    const auto lines = resonanceFields(sp.system, polarDeg, frequencyGHz, range);
    const auto weights = resonanceWeights(sp.system, polarDeg, frequencyGHz, lines, cw);
    const double scale = cwNormalization(sp.system, frequencyGHz, temperatureK) / reference *
                         sp.weight * std::exp(-twoTauUs / sp.t2Us);
    for (std::size_t l = 0; l < lines.size(); ++l) {
      out.lines.push_back(lines[l]);
      out.amplitudes.push_back(weights[l] * scale);
      out.species.push_back(s);
    }
    shapes.push_back({LineShapeKind::LorentzianAbsorption, sp.system.linewidthPP});
  }
  // sort all lines by field, keeping the parallel arrays aligned
  std::vector<std::size_t> order(out.lines.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.lines[a].fieldG < out.lines[b].fieldG;
  });
  EchoFieldSweep sorted;
  for (std::size_t i : order) {
    sorted.lines.push_back(out.lines[i]);
    sorted.amplitudes.push_back(out.amplitudes[i]);
    sorted.species.push_back(out.species[i]);
  }

  Spectrum& sp = sorted.spectrum;
  sp.axisKind = AxisKind::FieldG;
  sp.axis = linspace(range.lowG, range.highG, nPoints);
  sp.intensity.assign(nPoints, 0.0);
  for (std::size_t i = 0; i < nPoints; ++i) {
    for (std::size_t l = 0; l < sorted.lines.size(); ++l) {
      sp.intensity[i] += sorted.amplitudes[l] *
                         shapes[sorted.species[l]](sp.axis[i] - sorted.lines[l].fieldG);
    }
  }
  sp.meta["fMW_GHz"] = formatMetaNumber(frequencyGHz);
  sp.meta["theta_deg"] = formatMetaNumber(polarDeg);
  sp.meta["two_tau_us"] = formatMetaNumber(twoTauUs);
  sp.validate();
  return sorted;
}

}  // namespace v2sim
