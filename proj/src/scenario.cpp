#include "v2sim/scenario.hpp"

#include "v2sim/cw_spectrum.hpp"
#include "v2sim/errors.hpp"
#include "v2sim/fitting.hpp"
#include "v2sim/peldor.hpp"
#include "v2sim/pulse_engine.hpp"
#include "v2sim/pump_relax.hpp"
#include "v2sim/swr.hpp"
#include "v2sim/units.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace v2sim {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ParamSpec num(std::string key, json def, std::string unit, std::string doc) {
  return {std::move(key), ParamType::Number, std::move(def), std::move(unit), std::move(doc), false, {}};
}
ParamSpec integer(std::string key, json def, std::string doc) {
  return {std::move(key), ParamType::Integer, std::move(def), "1", std::move(doc), false, {}};
}
ParamSpec text(std::string key, json def, std::vector<std::string> choices, std::string doc) {
  return {std::move(key), ParamType::String, std::move(def), "", std::move(doc), false, std::move(choices)};
}
ParamSpec required(ParamSpec p) {
  p.required = true;
  p.defaultValue = nullptr;
  return p;
}

// spin-system keys shared by the V2 scenarios
std::vector<ParamSpec> spinParams() {
  return {
      num("S", 1.5, "1", "electron spin"),
      num("g", 2.0028, "1", "isotropic g factor"),
      num("D", 35.0, "MHz", "axial zero-field splitting"),
      num("E", 0.0, "MHz", "rhombic zero-field splitting"),
      num("linewidth", 3.0, "G", "peak-to-peak derivative linewidth"),
  };
}

std::vector<ParamSpec> pumpParams(double epsilon) {
  return {
      num("epsilon", epsilon, "1", "optical polarization amplitude, 0 gives thermal populations"),
      text("pumpPolarity", "intoHalf", {"intoHalf", "intoThreeHalves"},
           "levels fed by the optical cycle"),
      num("Top", 139.0, "us", "bare optical pumping time"),
      num("T1", 354.0, "us", "spin-lattice relaxation time"),
      num("temperature", 300.0, "K", "lattice temperature"),
  };
}

std::vector<ParamSpec> concat(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<ScenarioSpec> buildCatalog() {
  std::vector<ScenarioSpec> c;

  c.push_back({"rotpattern", "CW resonance fields versus field angle (rotational pattern)",
               concat(concat({required(num("fMW", nullptr, "GHz", "microwave frequency"))}, spinParams()),
                      concat(pumpParams(0.0),
                             {text("lineshape", "lorentzianDerivative",
                                   {"lorentzianDerivative", "gaussianDerivative",
                                    "lorentzianAbsorption", "gaussianAbsorption"},
                                   "line shape of the per-angle spectra"),
                              num("angleStart", 0.0, "deg", "first field angle from the c axis"),
                              num("angleStop", 90.0, "deg", "last field angle"),
                              num("angleStep", 3.0, "deg", "angle increment"),
                              num("fieldMin", 3250.0, "G", "low end of the field window"),
                              num("fieldMax", 3450.0, "G", "high end of the field window"),
                              integer("points", 2001, "field samples per spectrum")}))});

  c.push_back({"fieldsweep", "CW or echo-detected field-swept spectrum at one angle",
               concat(concat({required(num("fMW", nullptr, "GHz", "microwave frequency")),
                              num("theta", 0.0, "deg", "field angle from the c axis")},
                             spinParams()),
                      concat(pumpParams(0.05),
                             {text("detection", "cw", {"cw", "echo"},
                                   "cw derivative spectrum or echo-detected absorption"),
                              text("lineshape", "lorentzianDerivative",
                                   {"lorentzianDerivative", "gaussianDerivative",
                                    "lorentzianAbsorption", "gaussianAbsorption"},
                                   "cw line shape"),
                              num("fieldMin", 3250.0, "G", "low end of the sweep"),
                              num("fieldMax", 3400.0, "G", "high end of the sweep"),
                              integer("points", 1501, "field samples"),
                              num("twoTau", 2.4, "us", "echo delay 2 tau (echo detection)"),
                              num("T2", 48.0, "us", "phase memory time (echo detection)"),
                              num("extraLineOffset", 0.0, "G",
                                  "extra S=1/2 line this far above the low-field line, 0 disables"),
                              num("extraWeight", 0.5, "1", "amplitude of the extra line relative to V2"),
                              num("extraT2", 48.0, "us", "T2 of the extra species")}))});

  c.push_back({"rabi", "nutation traces for a list of microwave attenuations",
               concat(concat({num("fMW", 9.746, "GHz", "microwave frequency"),
                              num("B0", nullptr, "G", "static field, resonance of the probed pair when absent"),
                              num("theta", 0.0, "deg", "field angle from the c axis"),
                              integer("probedLower", 2, "lower level of the probed pair (ascending energy)")},
                             spinParams()),
                      concat(pumpParams(0.05),
                             {{"attenuations", ParamType::NumberList, json::array({10.0, 5.0, 0.0}), "dB",
                               "microwave attenuations, one trace each", false, {}},
                              num("referenceB1", 1.0, "G", "B1 at 0 dB attenuation"),
                              num("tMax", 2000.0, "ns", "longest nutation pulse"),
                              num("tStep", 4.0, "ns", "pulse length increment"),
                              num("inhomogeneousWidth", 0.0, "MHz", "FWHM of the resonance offset distribution"),
                              integer("quadratureNodes", 16, "Gauss-Hermite nodes for the offset average")}))});

  c.push_back({"echodecay", "Hahn echo amplitude versus 2 tau after an optical pulse",
               concat(concat({num("fMW", 9.308, "GHz", "microwave frequency"),
                              num("B0", nullptr, "G", "static field, resonance of the probed pair when absent"),
                              num("theta", 0.0, "deg", "field angle from the c axis"),
                              integer("probedLower", 2, "lower level of the probed pair (ascending energy)")},
                             spinParams()),
                      concat(pumpParams(0.05),
                             {num("T2", 48.0, "us", "phase memory time"),
                              num("tauStart", 0.5, "us", "first tau"),
                              num("tauStop", 120.0, "us", "last tau"),
                              integer("points", 120, "tau samples"),
                              num("piHalf", 16.0, "ns", "pi/2 pulse length"),
                              num("opticalPulse", 900.0, "us", "optical prelude length, 0 disables"),
                              num("opticalGap", 20.0, "us", "delay between light and the first pulse"),
                              num("inhomogeneousWidth", 0.0, "MHz", "FWHM of the resonance offset distribution"),
                              integer("quadratureNodes", 16, "Gauss-Hermite nodes for the offset average")}))});

  c.push_back({"pumprecovery", "echo-detected population through a fixed optical pulse, with piecewise fits",
               concat(concat({num("fMW", 9.308, "GHz", "microwave frequency"),
                              num("B0", nullptr, "G", "static field, resonance of the probed pair when absent"),
                              num("theta", 0.0, "deg", "field angle from the c axis"),
                              integer("probedLower", 2, "lower level of the probed pair (ascending energy)")},
                             spinParams()),
                      concat(pumpParams(0.05),
                             {num("lightStart", 200.0, "us", "optical pulse start"),
                              num("lightDuration", 1000.0, "us", "optical pulse length"),
                              num("delayStart", 0.0, "us", "first echo position"),
                              num("delayStop", 2500.0, "us", "last echo position"),
                              integer("points", 251, "echo positions"),
                              num("noise", 0.0, "1", "additive Gaussian noise, fraction of the largest |signal|"),
                              integer("seed", 1, "noise generator seed")}))});

  c.push_back({"deer", "four-pulse DEER echo versus pump frequency",
               concat(concat({num("fs", 9.308, "GHz", "probe frequency"),
                              num("fpStart", 9.15, "GHz", "first pump frequency"),
                              num("fpStop", 9.4, "GHz", "end of the pump range (exclusive)"),
                              num("step", 1.0, "MHz", "pump frequency step"),
                              num("pumpPulse", 64.0, "ns", "rectangular pump pulse length"),
                              num("pumpFlipAngle", 180.0, "deg", "pump flip angle at the resonator centre"),
                              text("echoKind", "stimulated", {"stimulated", "refocused"}, "detected echo"),
                              text("opticalMode", "continuous", {"continuous", "pulsedPrelude"},
                                   "continuous pumping or a prelude pulse"),
                              num("stimulatedRatio", 2.0, "1", "stimulated over refocused echo amplitude"),
                              num("resonatorCenter", nullptr, "GHz", "resonator centre, fs when absent"),
                              num("resonatorFwhm", 100.0, "MHz", "resonator power bandwidth"),
                              num("selfDepth", 0.5, "1", "driven-decoherence depth of the probe species"),
                              {"partners", ParamType::Table,
                               json::array({{{"label", "carbon"}, {"offsetMHz", -65.0},
                                             {"widthMHz", 8.4}, {"lambda", 0.3}}}),
                               "MHz|G",
                               "partner lines: label, offsetMHz (from fs) or offsetG (above the probe line), "
                               "widthMHz (FWHM), lambda",
                               false, {}},
                              num("B0", 3297.0, "G", "static field entering the thermal populations"),
                              integer("probedLower", 2, "lower level of the probed pair (ascending energy)"),
                              num("T2", 48.0, "us", "phase memory time"),
                              num("sequenceLength", 2.4, "us", "total dephasing time of the probe sequence"),
                              num("prelude", 900.0, "us", "optical prelude length (pulsedPrelude)"),
                              num("preludeGap", 20.0, "us", "gap after the prelude (pulsedPrelude)"),
                              num("dipThreshold", 0.01, "1", "dip prominence threshold, fraction of E0")},
                             spinParams()),
                      pumpParams(0.05))});

  c.push_back({"swr", "spin-wave resonance modes of a magnetized nanostripe",
               {num("fMW", 34.0, "GHz", "microwave frequency"),
                num("thickness", 100.0, "nm", "film thickness"),
                num("width", 300.0, "nm", "stripe width (along the field)"),
                num("length", 100.0, "um", "stripe length"),
                num("Ms4pi", 11700.0, "G", "saturation induction 4 pi Ms"),
                num("g", 2.00, "1", "g factor"),
                num("exchange", 1.3e-6, "erg/cm", "exchange stiffness A"),
                num("effectiveWidth", nullptr, "nm", "quantization width, the stripe width when absent"),
                integer("modes", 6, "highest mode index n"),
                num("fieldMin", 11500.0, "G", "low end of the sweep"),
                num("fieldMax", 14500.0, "G", "high end of the sweep"),
                integer("points", 3001, "field samples"),
                num("linewidth", 30.0, "G", "peak-to-peak linewidth of each mode")}});

  c.push_back({"fit", "monoexponential or piecewise fit of a two-column CSV trace",
               {{"input", ParamType::Path, nullptr, "", "CSV with time (us) and signal columns, "
                 "relative to the config file", true, {}},
                text("model", "mono", {"mono", "piecewise"}, "single decay or light-on/light-off pair"),
                num("lightOff", nullptr, "us", "light-off time (piecewise model)"),
                num("lightOn", nullptr, "us", "light-on time (piecewise model), first sample when absent"),
                num("tMin", nullptr, "us", "ignore samples before this time")}});
  return c;
}

std::string typeName(ParamType t) {
  switch (t) {
    case ParamType::Number: return "number";
    case ParamType::Integer: return "integer";
    case ParamType::String: return "string";
    case ParamType::Boolean: return "boolean";
    case ParamType::NumberList: return "number list";
    case ParamType::Table: return "table";
    case ParamType::Path: return "path";
  }
  return "?";
}

void checkType(const ParamSpec& spec, const json& v) {
  const auto fail = [&](const std::string& why) {
    throw ConfigError("parameter '" + spec.key + "': " + why);
  };
  if (v.is_null()) {
    if (spec.required) fail("required value missing");
    if (!spec.defaultValue.is_null()) fail("null is not allowed");
    return;
  }
  switch (spec.type) {
    case ParamType::Number:
      if (!v.is_number()) fail("expected a number in " + spec.unit);
      if (!std::isfinite(v.get<double>())) fail("must be finite");
      break;
    case ParamType::Integer:
      if (!v.is_number_integer()) fail("expected an integer");
      break;
    case ParamType::String:
      if (!v.is_string()) fail("expected a string");
      if (!spec.choices.empty() &&
          std::find(spec.choices.begin(), spec.choices.end(), v.get<std::string>()) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
        fail("'" + v.get<std::string>() + "' is not one of " + all);
      }
      break;
    case ParamType::Boolean:
      if (!v.is_boolean()) fail("expected true or false");
      break;
    case ParamType::NumberList:
      if (!v.is_array() || v.empty()) fail("expected a non-empty list of numbers");
      for (const auto& e : v) {
        if (!e.is_number()) fail("expected a list of numbers");
      }
      break;
    case ParamType::Table:
      if (!v.is_array()) fail("expected a list of objects");
      for (const auto& e : v) {
        if (!e.is_object()) fail("expected a list of objects");
      }
      break;
    case ParamType::Path:
      if (!v.is_string() || v.get<std::string>().empty()) fail("expected a file path");
      break;
  }
}

std::string renderValue(const json& v) {
  if (v.is_null()) return "auto";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return formatMetaNumber(v.get<double>());
  return v.dump();
}

// typed accessors on a resolved parameter tree
struct Params {
  const json& p;

  double num(const std::string& k) const { return p.at(k).get<double>(); }
  std::optional<double> opt(const std::string& k) const {
    const json& v = p.at(k);
    return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
  }
  long integer(const std::string& k) const { return p.at(k).get<long>(); }
  std::string str(const std::string& k) const { return p.at(k).get<std::string>(); }
  std::size_t count(const std::string& k, long minimum) const {
    const long v = integer(k);
    if (v < minimum) throw ConfigError("parameter '" + k + "' must be >= " + std::to_string(minimum));
    return static_cast<std::size_t>(v);
  }
};

SpinSystem spinSystem(const Params& p) {
  SpinSystem s;
  s.spin = p.num("S");
  s.g = p.num("g");
  s.zfsD = p.num("D");
  s.zfsE = p.num("E");
  s.linewidthPP = p.num("linewidth");
  s.validate();
  return s;
}

LevelPair probedPair(const Params& p, const SpinSystem& sys) {
  const long lower = p.integer("probedLower");
  if (lower < 0 || lower + 1 >= sys.multiplicity()) {
    throw ConfigError("parameter 'probedLower' must lie in [0, " + std::to_string(sys.multiplicity() - 2) + "]");
  }
  return {static_cast<int>(lower), static_cast<int>(lower) + 1};
}

/// Field where the given pair is resonant at f; searched over +-50% of the g-only field.
double resonantField(const SpinSystem& sys, double polarDeg, double fGHz, LevelPair pair) {
  const double center = fGHz * 1000.0 / larmorMHz(sys.g, 1.0);
  const auto lines = resonanceFields(sys, polarDeg, fGHz, {0.5 * center, 1.5 * center});
  for (const Resonance& r : lines) {
    if (r.levels == pair) return r.fieldG;
  }
  throw NumericalError("probed pair has no resonance near " + formatMetaNumber(center) + " G");
}

PumpModel pumpModel(const Params& p, const SpinSystem& sys, const FieldOrientation& field) {
  return makePumpModel(sys, field, p.num("epsilon"), p.num("Top"), p.num("T1"), p.num("temperature"),
                       parsePumpPolarity(p.str("pumpPolarity")));
}

std::vector<double> rangeGrid(double start, double stop, double step, const std::string& key) {
  if (!(step > 0.0)) throw ConfigError("parameter '" + key + "' must be positive");
  if (stop < start) throw ConfigError("range for '" + key + "' runs backwards");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

void copyParamsToMeta(const ResolvedConfig& cfg, Table& t) {
  t.meta["scenario"] = cfg.scenario;
  for (const auto& [key, value] : cfg.params.items()) {
    const bool table = value.is_array() && std::any_of(value.begin(), value.end(),
                                                       [](const json& e) { return e.is_object(); });
    if (table) continue;  // partner tables are summarised by their scenario
    t.meta["param." + key] = renderValue(value);
  }
}

PlotSeries seriesOf(const Spectrum& s, std::string label) {
  return {std::move(label), s.axis, s.intensity, false};
}

// scenario runners ----------------------------------------------------------

ScenarioResult runRotpattern(const Params& p) {
  const SpinSystem sys = spinSystem(p);
  const double f = p.num("fMW");
  const auto angles = rangeGrid(p.num("angleStart"), p.num("angleStop"), p.num("angleStep"), "angleStep");
  CwSettings cw;
  cw.shape = {parseLineShapeKind(p.str("lineshape")), sys.linewidthPP};
  cw.temperatureK = p.num("temperature");
  if (p.num("epsilon") != 0.0) {
    const double center = f * 1000.0 / larmorMHz(sys.g, 1.0);
    cw.populations = pumpModel(p, sys, {center, 0.0}).illuminatedFixedPoint();
  }
  const RotationalPattern pattern = rotationalPattern(sys, f, angles, {p.num("fieldMin"), p.num("fieldMax")},
                                                      p.count("points", 2), cw);
  ScenarioResult r;
  const int n = sys.multiplicity();
  r.table.columns.push_back("theta_deg");
  for (int k = 0; k + 1 < n; ++k) {
    r.table.columns.push_back("B_" + std::to_string(k) + "_" + std::to_string(k + 1) + "_G");
  }
  std::vector<PlotSeries> lines(static_cast<std::size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k) {
    lines[static_cast<std::size_t>(k)].label = std::to_string(k) + "-" + std::to_string(k + 1);
    lines[static_cast<std::size_t>(k)].markers = true;
  }
  for (const AngleResonances& a : pattern.positions) {
    std::vector<double> row(static_cast<std::size_t>(n), kNaN);
    row[0] = a.polarDeg;
    for (const Resonance& res : a.lines) {
      if (res.levels.upper != res.levels.lower + 1) continue;
      const auto k = static_cast<std::size_t>(res.levels.lower);
      row[k + 1] = res.fieldG;
      lines[k].x.push_back(a.polarDeg);
      lines[k].y.push_back(res.fieldG);
    }
    r.table.rows.push_back(std::move(row));
  }
  r.table.meta["fMW_GHz"] = formatMetaNumber(f);
  r.plot = {"Rotational pattern", "angle from c axis (deg)", "resonance field (G)", lines};
  return r;
}

ScenarioResult runFieldsweep(const Params& p) {
  const SpinSystem sys = spinSystem(p);
  const double f = p.num("fMW");
  const double theta = p.num("theta");
  const FieldInterval range{p.num("fieldMin"), p.num("fieldMax")};
  const std::size_t n = p.count("points", 2);
  const double center = f * 1000.0 / larmorMHz(sys.g, 1.0);
  std::optional<PopulationState> pops;
  if (p.num("epsilon") != 0.0) pops = pumpModel(p, sys, {center, theta}).illuminatedFixedPoint();

  ScenarioResult r;
  Spectrum spectrum;
  if (p.str("detection") == "cw") {
    CwSettings cw;
    cw.shape = {parseLineShapeKind(p.str("lineshape")), sys.linewidthPP};
    cw.temperatureK = p.num("temperature");
    cw.populations = pops;
    spectrum = fieldSweep(sys, theta, f, range, n, cw);
  } else {
    std::vector<EchoSpecies> species{{sys, pops, p.num("T2"), 1.0}};
    const double offset = p.num("extraLineOffset");
    if (offset != 0.0) {
      // S = 1/2 partner whose single line sits `offset` above the lowest V2 line
      const auto v2 = resonanceFields(sys, theta, f, {0.5 * center, 1.5 * center});
      if (v2.empty()) throw NumericalError("no V2 line to place the extra species against");
      SpinSystem extra;
      extra.spin = 0.5;
      extra.zfsD = 0.0;
      extra.label = "extra";
      extra.linewidthPP = sys.linewidthPP;
      extra.g = f * 1000.0 / larmorMHz(1.0, v2.front().fieldG + offset);
      species.push_back({extra, std::nullopt, p.num("extraT2"), p.num("extraWeight")});
      r.notes.push_back("extra species g = " + formatMetaNumber(extra.g));
    }
    const EchoFieldSweep sweep = echoDetectedFieldSweep(species, theta, f, range, n, p.num("twoTau"),
                                                        p.num("temperature"));
    spectrum = sweep.spectrum;
    for (std::size_t i = 0; i < sweep.lines.size(); ++i) {
      spectrum.meta["line" + std::to_string(i) + "_G"] = formatMetaNumber(sweep.lines[i].fieldG);
    }
  }
  r.table = spectrumTable(spectrum);
  r.plot = {"Field sweep", "magnetic field (G)", "intensity (arb. units)", {seriesOf(spectrum, "")}};
  return r;
}

struct FrameSetup {
  SpinSystem sys;
  FieldOrientation field;
  LevelPair probed;
};

FrameSetup frameSetup(const Params& p) {
  FrameSetup s{spinSystem(p), {}, {}};
  s.probed = probedPair(p, s.sys);
  const double theta = p.num("theta");
  const double b0 = p.opt("B0").value_or(resonantField(s.sys, theta, p.num("fMW"), s.probed));
  s.field = {b0, theta};
  s.field.validate();
  return s;
}

ScenarioResult runRabi(const Params& p) {
  const FrameSetup setup = frameSetup(p);
  FrameSettings fs;
  fs.referenceGHz = p.num("fMW");
  fs.probed = setup.probed;
  fs.referenceB1G = p.num("referenceB1");
  fs.inhomogeneousWidthMHz = p.num("inhomogeneousWidth");
  fs.quadratureNodes = static_cast<int>(p.count("quadratureNodes", 1));
  fs.temperatureK = p.num("temperature");
  const RotatingFrame frame(setup.sys, setup.field, fs);
  const PumpModel pump = pumpModel(p, setup.sys, setup.field);

  const auto grid = rangeGrid(0.0, p.num("tMax"), p.num("tStep"), "tStep");
  std::vector<NutationDrive> drives;
  for (const auto& a : p.p.at("attenuations")) drives.push_back({std::nullopt, a.get<double>()});
  const auto traces = rabiTrace(frame, drives, grid, pump.illuminatedFixedPoint());

  ScenarioResult r;
  r.table.columns.push_back("time_ns");
  for (const Spectrum& t : traces) r.table.columns.push_back("dP_" + t.meta.at("attenuation_dB") + "dB");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (const Spectrum& t : traces) row.push_back(t.intensity[i]);
    r.table.rows.push_back(std::move(row));
  }
  r.plot = {"Nutation", "pulse length (ns)", "population difference", {}};
  for (const Spectrum& t : traces) {
    const std::string tag = t.meta.at("attenuation_dB") + "dB";
    r.table.meta["nutation_MHz_" + tag] = t.meta.at("nutation_MHz");
    r.table.meta["B1_G_" + tag] = t.meta.at("B1_G");
    r.plot.series.push_back({tag, grid, t.intensity, false});
  }
  r.table.meta["B0_G"] = formatMetaNumber(setup.field.magnitudeG);
  return r;
}

ScenarioResult runEchodecay(const Params& p) {
  const FrameSetup setup = frameSetup(p);
  FrameSettings fs;
  fs.referenceGHz = p.num("fMW");
  fs.probed = setup.probed;
  fs.inhomogeneousWidthMHz = p.num("inhomogeneousWidth");
  fs.quadratureNodes = static_cast<int>(p.count("quadratureNodes", 1));
  fs.temperatureK = p.num("temperature");
  const RotatingFrame frame(setup.sys, setup.field, fs);
  const PumpModel pump = pumpModel(p, setup.sys, setup.field);
  const RelaxationParams relax{p.num("T1"), p.num("T2")};
  HahnSettings hahn;
  hahn.piHalfNs = p.num("piHalf");
  hahn.opticalPulseUs = p.num("opticalPulse");
  hahn.opticalGapUs = p.num("opticalGap");
  const auto tau = linspace(p.num("tauStart"), p.num("tauStop"), p.count("points", 4));
  const Spectrum decay = hahnEchoDecay(frame, relax, tau, hahn, &pump);

  ScenarioResult r;
  r.table = spectrumTable(decay, "echo");
  r.table.columns[0] = "two_tau_us";
  r.table.meta["B0_G"] = formatMetaNumber(setup.field.magnitudeG);
  r.plot = {"Hahn echo decay", "2 tau (us)", "echo amplitude", {seriesOf(decay, "echo")}};
  const FitResult fit = fitMonoExponential(decay);
  if (fit.converged) {
    r.table.meta["fit.T2_us"] = formatMetaNumber(fit.params.timeConstantUs);
    std::vector<double> y;
    for (double t : decay.axis) y.push_back(fit.params(t));
    r.plot.series.push_back({"fit", decay.axis, y, false});
  } else {
    r.notes.push_back("echo decay fit: " + fit.diagnostic);
  }
  return r;
}

void recordFit(Table& t, const std::string& prefix, const FitResult& fit) {
  t.meta[prefix + "converged"] = fit.converged ? "true" : "false";
  t.meta[prefix + "iterations"] = std::to_string(fit.iterations);
  if (!fit.converged) {
    t.meta[prefix + "diagnostic"] = fit.diagnostic;
    return;
  }
  t.meta[prefix + "amplitude"] = formatMetaNumber(fit.params.amplitude);
  t.meta[prefix + "tau_us"] = formatMetaNumber(fit.params.timeConstantUs);
  t.meta[prefix + "tau_stderr_us"] = formatMetaNumber(fit.stdErrors.timeConstantUs);
  t.meta[prefix + "offset"] = formatMetaNumber(fit.params.offset);
  t.meta[prefix + "residual_norm"] = formatMetaNumber(fit.residualNorm);
}

std::vector<double> fittedCurve(const std::vector<double>& t, const FitResult& fit, double from, double to) {
  std::vector<double> y;
  for (double v : t) y.push_back(fit.converged && v >= from && v < to ? fit.params(v) : kNaN);
  return y;
}

/// Fits piecewise recovery and appends the fit columns and metadata to the table.
void addPiecewiseFit(ScenarioResult& r, const Spectrum& trace, double lightOff, std::optional<double> lightOn) {
  const PiecewiseFit fit = fitPiecewiseRecovery(trace, lightOff, lightOn);
  recordFit(r.table, "fit_on.", fit.duringLight);
  recordFit(r.table, "fit_off.", fit.afterLight);
  if (fit.duringLight.converged && fit.afterLight.converged) {
    const RecoveryTimes times = recoveryTimes(fit);
    r.table.meta["fit.Top_eff_us"] = formatMetaNumber(times.effectivePumpUs);
    r.table.meta["fit.Top_us"] = formatMetaNumber(times.bareOpticalUs);
    r.table.meta["fit.T1_us"] = formatMetaNumber(times.t1Us);
    r.table.meta["fit.boundary_gap"] = formatMetaNumber(fit.boundaryGap);
  } else {
    r.notes.push_back("piecewise fit did not converge on both segments");
  }
  const double start = lightOn.value_or(trace.axis.front());
  const auto on = fittedCurve(trace.axis, fit.duringLight, start, lightOff);
  const auto off = fittedCurve(trace.axis, fit.afterLight, lightOff, std::numeric_limits<double>::infinity());
  r.table.columns.push_back("fit_on");
  r.table.columns.push_back("fit_off");
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    r.table.rows[i].push_back(on[i]);
    r.table.rows[i].push_back(off[i]);
  }
  auto finite = [&](const std::vector<double>& y, std::string label) {
    PlotSeries s{std::move(label), {}, {}, false};
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (std::isnan(y[i])) continue;
      s.x.push_back(trace.axis[i]);
      s.y.push_back(y[i]);
    }
    return s;
  };
  r.plot.series.push_back(finite(on, "fit (light on)"));
  r.plot.series.push_back(finite(off, "fit (light off)"));
}

ScenarioResult runPumprecovery(const Params& p) {
  const FrameSetup setup = frameSetup(p);
  const PumpModel pump = pumpModel(p, setup.sys, setup.field);
  RecoveryTiming timing;
  timing.sweepStartUs = p.num("delayStart");
  timing.lightStartUs = p.num("lightStart");
  timing.lightDurationUs = p.num("lightDuration");
  timing.probed = setup.probed;
  const auto delays = linspace(p.num("delayStart"), p.num("delayStop"), p.count("points", 8));
  Spectrum trace = echoDetectedRecoveryTrace(pump, timing, delays);

  const double noise = p.num("noise");
  if (noise < 0.0) throw ConfigError("parameter 'noise' must be non-negative");
  if (noise > 0.0) {
    double peak = 0.0;
    for (double v : trace.intensity) peak = std::max(peak, std::abs(v));
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.integer("seed")));
    std::normal_distribution<double> gauss(0.0, noise * peak);
    for (double& v : trace.intensity) v += gauss(rng);
  }

  ScenarioResult r;
  r.table = spectrumTable(trace, "population_difference");
  r.table.columns[0] = "delay_us";
  r.table.meta["B0_G"] = formatMetaNumber(setup.field.magnitudeG);
  r.table.meta["model.Top_eff_us"] = formatMetaNumber(pump.effectivePumpTimeUs());
  r.plot = {"Optical pumping and recovery", "echo position (us)", "population difference",
            {{"data", trace.axis, trace.intensity, true}}};
  if (p.num("epsilon") != 0.0) {
    addPiecewiseFit(r, trace, timing.lightStartUs + timing.lightDurationUs, timing.lightStartUs);
  } else {
    r.notes.push_back("epsilon = 0: trace stays at the thermal value, no fit attempted");
  }
  return r;
}

std::vector<PartnerSpecies> parsePartners(const json& table, double fsGHz, double g) {
  std::vector<PartnerSpecies> out;
  std::size_t index = 0;
  for (const json& row : table) {
    const std::string where = "partners[" + std::to_string(index++) + "]";
    for (const auto& [key, value] : row.items()) {
      static const std::vector<std::string> known{"label", "offsetMHz", "offsetG", "widthMHz", "lambda"};
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError("unknown key '" + where + "." + key + "'");
      }
      if (key == "label" ? !value.is_string() : !value.is_number()) {
        throw ConfigError("parameter '" + where + "." + key + "' has the wrong type");
      }
    }
    const bool hasMHz = row.contains("offsetMHz"), hasG = row.contains("offsetG");
    if (hasMHz == hasG) throw ConfigError("'" + where + "' needs exactly one of offsetMHz / offsetG");
    if (!row.contains("lambda")) throw ConfigError("required key '" + where + ".lambda' missing");
    const std::string label = row.value("label", where);
    const double width = row.value("widthMHz", 8.4);
    const double lambda = row.at("lambda").get<double>();
    PartnerSpecies s;
    if (hasG) {
      s = partnerFromFieldOffset(label, fsGHz, row.at("offsetG").get<double>(), g, width, lambda);
    } else {
      s.label = label;
      s.lineCenterGHz = fsGHz + row.at("offsetMHz").get<double>() / 1000.0;
      s.lineWidthMHz = width;
      s.depth = lambda;
    }
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("'" + where + "': " + e.what());
    }
    out.push_back(s);
  }
  return out;
}

ScenarioResult runDeer(const Params& p) {
  const SpinSystem sys = spinSystem(p);
  DeerSweepConfig cfg;
  cfg.fsGHz = p.num("fs");
  cfg.fpStartGHz = p.num("fpStart");
  cfg.fpStopGHz = p.num("fpStop");
  cfg.stepMHz = p.num("step");
  cfg.pump.durationNs = p.num("pumpPulse");
  cfg.pump.flipAngleDeg = p.num("pumpFlipAngle");
  cfg.echoKind = parseEchoKind(p.str("echoKind"));
  cfg.opticalMode = parseOpticalMode(p.str("opticalMode"));
  cfg.stimulatedToRefocusedRatio = p.num("stimulatedRatio");
  cfg.sequenceLengthUs = p.num("sequenceLength");
  cfg.preludeUs = p.num("prelude");
  cfg.preludeGapUs = p.num("preludeGap");
  DeerProbe probe;
  probe.system = sys;
  probe.probed = probedPair(p, sys);
  probe.selfDepth = p.num("selfDepth");
  const ResonatorProfile resonator{p.opt("resonatorCenter").value_or(cfg.fsGHz), p.num("resonatorFwhm")};
  const RelaxationParams relax{p.num("T1"), p.num("T2")};
  const PumpModel pump = pumpModel(p, sys, {p.num("B0"), 0.0});
  const auto partners = parsePartners(p.p.at("partners"), cfg.fsGHz, sys.g);

  const DeerSweepResult sweep = deerSweep(cfg, probe, partners, resonator, relax, pump);
  ScenarioResult r;
  r.notes = sweep.diagnostics;
  r.table = spectrumTable(sweep.spectrum, "echo");
  r.table.columns[0] = "fp_MHz";
  const auto dips = dipDetect(sweep.spectrum, p.num("dipThreshold") * sweep.e0);
  r.table.meta["dips"] = std::to_string(dips.size());
  for (std::size_t i = 0; i < dips.size(); ++i) {
    r.table.meta["dip" + std::to_string(i) + "_GHz"] = formatMetaNumber(dips[i].centerGHz);
    r.table.meta["dip" + std::to_string(i) + "_depth"] = formatMetaNumber(dips[i].depth / sweep.e0);
  }
  for (std::size_t i = 0; i < sweep.species.size(); ++i) {
    const PartnerSpecies& s = sweep.species[i];
    r.table.meta["species" + std::to_string(i)] =
        s.label + " " + formatMetaNumber(s.lineCenterGHz) + " GHz lambda " + formatMetaNumber(s.depth);
  }
  r.plot = {"DEER pump sweep", "pump frequency (MHz)", "echo (arb. units)", {seriesOf(sweep.spectrum, "")}};
  return r;
}

ScenarioResult runSwr(const Params& p) {
  StripeSpec spec;
  spec.thicknessNm = p.num("thickness");
  spec.widthNm = p.num("width");
  spec.lengthUm = p.num("length");
  spec.ms4piG = p.num("Ms4pi");
  spec.g = p.num("g");
  spec.exchangeErgPerCm = p.num("exchange");
  spec.effectiveWidthNm = p.opt("effectiveWidth");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const double f = p.num("fMW");
  const SwrSpectrum s = swrSpectrum(spec, f, p.num("fieldMin"), p.num("fieldMax"), p.count("points", 2),
                                    p.num("linewidth"), static_cast<int>(p.count("modes", 1)));
  ScenarioResult r;
  r.table.columns = {"field_G", "absorption", "derivative"};
  for (std::size_t i = 0; i < s.absorption.size(); ++i) {
    r.table.rows.push_back({s.absorption.axis[i], s.absorption.intensity[i], s.derivative.intensity[i]});
  }
  r.table.meta = s.derivative.meta;
  const DemagFactors nf = demagFactors(spec);
  r.table.meta["demag.width"] = formatMetaNumber(nf.width);
  r.table.meta["demag.length"] = formatMetaNumber(nf.length);
  r.table.meta["demag.thickness"] = formatMetaNumber(nf.thickness);
  for (const SwrMode& m : s.modes) {
    r.table.meta["mode" + std::to_string(m.n) + "_G"] = formatMetaNumber(m.resonanceFieldG);
    if (m.resonanceFieldG < p.num("fieldMin") || m.resonanceFieldG > p.num("fieldMax")) {
      r.notes.push_back("mode " + std::to_string(m.n) + " lies outside the sweep window");
    }
  }
  r.plot = {"Spin-wave resonance", "magnetic field (G)", "dP/dH (arb. units)", {seriesOf(s.derivative, "")}};
  return r;
}

ScenarioResult runFit(const Params& p, const std::string& baseDir) {
  std::filesystem::path input = p.str("input");
  if (input.is_relative()) input = std::filesystem::path(baseDir) / input;
  Table data;
  try {
    data = readCsvFile(input.string());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("parameter 'input': " + std::string(e.what()));
  }
  if (data.columns.size() < 2) throw ConfigError("parameter 'input': need at least two columns");
  Spectrum trace;
  trace.axisKind = AxisKind::TimeUs;
  const double tMin = p.opt("tMin").value_or(-std::numeric_limits<double>::infinity());
  for (const auto& row : data.rows) {
    if (row[0] < tMin) continue;
    trace.axis.push_back(row[0]);
    trace.intensity.push_back(row[1]);
  }
  try {
    trace.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("parameter 'input': " + std::string(e.what()));
  }

  ScenarioResult r;
  r.table.columns = {data.columns[0], data.columns[1]};
  for (std::size_t i = 0; i < trace.size(); ++i) r.table.rows.push_back({trace.axis[i], trace.intensity[i]});
  r.plot = {"Exponential fit", data.columns[0], data.columns[1], {{"data", trace.axis, trace.intensity, true}}};
  if (p.str("model") == "mono") {
    const FitResult fit = fitMonoExponential(trace);
    recordFit(r.table, "fit.", fit);
    if (!fit.converged) r.notes.push_back("fit: " + fit.diagnostic);
    const auto y = fittedCurve(trace.axis, fit, -std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity());
    r.table.columns.push_back("fit");
    for (std::size_t i = 0; i < y.size(); ++i) r.table.rows[i].push_back(y[i]);
    if (fit.converged) r.plot.series.push_back({"fit", trace.axis, y, false});
  } else {
    const auto off = p.opt("lightOff");
    if (!off) throw ConfigError("parameter 'lightOff': required for the piecewise model");
    addPiecewiseFit(r, trace, *off, p.opt("lightOn"));
  }
  return r;
}

}  // namespace

const ParamSpec* ScenarioSpec::find(const std::string& key) const {
  for (const ParamSpec& p : params) {
    if (p.key == key) return &p;
  }
  return nullptr;
}

const std::vector<ScenarioSpec>& scenarioCatalog() {
  static const std::vector<ScenarioSpec> catalog = buildCatalog();
  return catalog;
}

const ScenarioSpec& scenarioSpec(const std::string& name) {
  for (const ScenarioSpec& s : scenarioCatalog()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

std::string listScenarios() {
  std::ostringstream os;
  for (const ScenarioSpec& s : scenarioCatalog()) {
    os << s.name << ": " << s.summary << '\n';
    for (const ParamSpec& p : s.params) {
      os << "  " << p.key << " (" << typeName(p.type);
      if (!p.unit.empty()) os << ", " << p.unit;
      os << ")";
      if (p.required) {
        os << " required";
      } else {
        os << " default " << renderValue(p.defaultValue);
      }
      os << " - " << p.doc;
      if (!p.choices.empty()) {
        os << " [";
        for (std::size_t i = 0; i < p.choices.size(); ++i) os << (i ? "|" : "") << p.choices[i];
        os << "]";
      }
      os << '\n';
    }
  }
  os << "output: csv (path), plot (path, .svg), precision (integer, default 6)\n";
  return os.str();
}

std::pair<std::string, json> parseOverride(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  return {key, value};
}

ResolvedConfig resolveConfig(const std::string& scenario, const json& file,
                             const std::vector<std::string>& overrides, const std::string& baseDir) {
  const ScenarioSpec& spec = scenarioSpec(scenario);
  if (!file.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : file.items()) {
    if (key != "scenario" && key != "params" && key != "output") {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  if (file.contains("scenario") && file.at("scenario") != scenario) {
    throw ConfigError("key 'scenario' is '" + file.at("scenario").dump() + "' but '" + scenario +
                      "' was requested");
  }

  ResolvedConfig cfg;
  cfg.scenario = scenario;
  cfg.baseDir = baseDir;
  cfg.params = json::object();
  for (const ParamSpec& p : spec.params) cfg.params[p.key] = p.defaultValue;

  const json params = file.value("params", json::object());
  if (!params.is_object()) throw ConfigError("key 'params' must be an object");
  for (const auto& [key, value] : params.items()) {
    if (!spec.find(key)) throw ConfigError("unknown key 'params." + key + "' for scenario " + scenario);
    cfg.params[key] = value;
  }

  json output = file.value("output", json::object());
  if (!output.is_object()) throw ConfigError("key 'output' must be an object");

  for (const std::string& o : overrides) {
    auto [key, value] = parseOverride(o);
    if (key.rfind("output.", 0) == 0) {
      output[key.substr(7)] = value;
      continue;
    }
    const std::string bare = key.rfind("params.", 0) == 0 ? key.substr(7) : key;
    if (!spec.find(bare)) throw ConfigError("unknown key '" + key + "' for scenario " + scenario);
    cfg.params[bare] = value;
  }

  for (const auto& [key, value] : output.items()) {
    if (key == "csv" || key == "plot") {
      if (!value.is_string() || value.get<std::string>().empty()) {
        throw ConfigError("key 'output." + key + "' must be a file path");
      }
      (key == "csv" ? cfg.output.csvPath : cfg.output.plotPath) = value.get<std::string>();
    } else if (key == "precision") {
      if (!value.is_number_integer() || value.get<int>() < 0 || value.get<int>() > 17) {
        throw ConfigError("key 'output.precision' must be an integer in [0, 17]");
      }
      cfg.output.precision = value.get<int>();
    } else {
      throw ConfigError("unknown key 'output." + key + "'");
    }
  }

  for (const ParamSpec& p : spec.params) checkType(p, cfg.params.at(p.key));
  return cfg;
}

ScenarioResult executeScenario(const ResolvedConfig& config) {
  const Params p{config.params};
  ScenarioResult r;
  try {
    const std::string& s = config.scenario;
    if (s == "rotpattern") r = runRotpattern(p);
    else if (s == "fieldsweep") r = runFieldsweep(p);
    else if (s == "rabi") r = runRabi(p);
    else if (s == "echodecay") r = runEchodecay(p);
    else if (s == "pumprecovery") r = runPumprecovery(p);
    else if (s == "deer") r = runDeer(p);
    else if (s == "swr") r = runSwr(p);
    else if (s == "fit") r = runFit(p, config.baseDir);
    else throw ConfigError("unknown scenario '" + s + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed parameter: ") + e.what());
  }
  copyParamsToMeta(config, r.table);
  return r;
}

int runScenario(const RunRequest& request, std::ostream& out, std::ostream& err) {
  try {
    json file = json::object();
    if (!request.configPath.empty()) {
      std::ifstream in(request.configPath);
      if (!in) throw ConfigError("cannot read config file '" + request.configPath + "'");
      file = json::parse(in, nullptr, false);
      if (file.is_discarded()) throw ConfigError("config file '" + request.configPath + "' is not valid JSON");
    }
    const std::string baseDir = std::filesystem::path(request.configPath).parent_path().string();
    ResolvedConfig cfg = resolveConfig(request.scenario, file, request.overrides, baseDir.empty() ? "." : baseDir);
    if (request.csvPath) cfg.output.csvPath = request.csvPath;
    if (request.plotPath) cfg.output.plotPath = request.plotPath;

    const ScenarioResult result = executeScenario(cfg);
    for (const std::string& n : result.notes) err << request.scenario << ": " << n << '\n';
    try {
      if (cfg.output.csvPath) {
        writeCsvFile(*cfg.output.csvPath, result.table, cfg.output.precision);
      } else {
        writeCsv(out, result.table, cfg.output.precision);
      }
      if (cfg.output.plotPath) writeSvgFile(*cfg.output.plotPath, result.plot);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    return 0;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace v2sim
