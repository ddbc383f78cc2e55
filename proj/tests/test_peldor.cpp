#include "v2sim/peldor.hpp"
#include "v2sim/units.hpp"

#include <doctest.h>

#include <cmath>

using namespace v2sim;
using doctest::Approx;

namespace {

struct DeerFixture {
  SpinSystem sys;
  FieldOrientation field{3297.0, 0.0};
  PumpModel pump = makePumpModel(sys, field, 0.05, 139.0, 354.0);
  DeerProbe probe{sys, {2, 3}, 0.5};
  ResonatorProfile resonator{9.308, 100.0};
  RelaxationParams relax{354.0, 48.0};
  DeerSweepConfig config;

  PartnerSpecies carbon() const {
    PartnerSpecies c;
    c.label = "carbon";
    c.lineCenterGHz = 9.308 - 0.065;
    c.lineWidthMHz = 8.4;
    c.depth = 0.3;
    return c;
  }

  DeerSweepResult run(const std::vector<PartnerSpecies>& partners) const {
    return deerSweep(config, probe, partners, resonator, relax, pump);
  }
};

Spectrum lorentzDip(double center, double hwhm, double depth) {
  Spectrum s;
  s.axisKind = AxisKind::FrequencyMHz;
  for (double f = 9150.0; f < 9400.0; f += 1.0) {
    const double u = (f - center) / hwhm;
    s.axis.push_back(f);
    s.intensity.push_back(1.0 - depth / (1.0 + u * u));
  }
  return s;
}

}  // namespace

TEST_CASE("resonator transmission profile") {
  const ResonatorProfile r{9.308, 100.0};
  CHECK(resonatorTransmission(r, 9.308) == Approx(1.0));
  CHECK(resonatorTransmission(r, 9.358) == Approx(0.5));
  CHECK(resonatorTransmission(r, 9.258) == Approx(0.5));
  CHECK(resonatorTransmission(r, 9.178) == Approx(1.0 / (1.0 + 2.6 * 2.6)).epsilon(1e-9));
  CHECK(resonatorTransmission(r, 9.178) == Approx(0.129).epsilon(0.01));
  CHECK_THROWS_AS(resonatorTransmission(ResonatorProfile{9.3, 0.0}, 9.3), std::invalid_argument);
}

TEST_CASE("rectangular flip probability") {
  // resonant pi pulse
  CHECK(rectangularFlipProbability(1.0 / (2 * 0.064), 0.0, 0.064) == Approx(1.0));
  CHECK(rectangularFlipProbability(0.0, 3.0, 0.1) == 0.0);
  CHECK(rectangularFlipProbability(0.0, 0.0, 0.1) == 0.0);
  CHECK(rectangularFlipProbability(5.0, 3.0, 0.1) == Approx(rectangularFlipProbability(5.0, -3.0, 0.1)));
}

TEST_CASE("pump excitation: narrow line at centre, far off, symmetry") {
  const ResonatorProfile flat{9.308, 1e6};
  PartnerSpecies narrow;
  narrow.lineCenterGHz = 9.308;
  narrow.lineWidthMHz = 0.01;
  const PumpPulse pi{64.0, 180.0};
  CHECK(pumpExcitationProbability(narrow, 9.308, pi, flat) == Approx(1.0).epsilon(0.05));
  // far outside both the resonator band and the partner line
  CHECK(pumpExcitationProbability(narrow, 9.7, pi, ResonatorProfile{9.308, 100.0}) < 1e-3);
  PartnerSpecies wide = narrow;
  wide.lineWidthMHz = 8.4;
  CHECK(pumpExcitationProbability(wide, 9.318, pi, flat) ==
        Approx(pumpExcitationProbability(wide, 9.298, pi, flat)).epsilon(1e-9));
  CHECK_THROWS_AS(pumpExcitationProbability(narrow, 9.3, PumpPulse{0.0, 180.0}, flat),
                  std::invalid_argument);
}

TEST_CASE("field offset maps to a lower pump frequency") {
  const auto p = partnerFromFieldOffset("c", 9.308, 23.19, 2.0028, 8.4, 0.3);
  CHECK(p.lineCenterGHz == Approx(9.308 - larmorMHz(2.0028, 23.19) / 1000.0));
  CHECK((9.308 - p.lineCenterGHz) * 1000.0 == Approx(65.0).epsilon(0.01));
  CHECK_THROWS_AS(partnerFromFieldOffset("c", 9.308, 1.0, 2.0, 8.4, 1.5), std::invalid_argument);
}

TEST_CASE("DEER sweep: grid, dips at the self and partner lines") {
  DeerFixture fx;
  const auto freqs = fx.config.pumpFrequenciesGHz();
  CHECK(freqs.size() == 250);
  CHECK(freqs.front() == Approx(9.15));
  CHECK(freqs.back() == Approx(9.399));

  const auto r = fx.run({fx.carbon()});
  CHECK(r.spectrum.size() == 250);
  CHECK(r.species.size() == 2);
  const auto dips = dipDetect(r.spectrum, 0.01 * r.e0);
  REQUIRE(dips.size() == 2);
  CHECK(std::abs(dips[0].centerGHz - 9.243) < 1e-3);
  CHECK(std::abs(dips[1].centerGHz - 9.308) < 1e-3);
  for (double v : r.spectrum.intensity) {
    CHECK(v <= r.e0 * (1 + 1e-12));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("DEER species act multiplicatively") {
  DeerFixture fx;
  const auto both = fx.run({fx.carbon()});
  const auto self = fx.run({});
  PartnerSpecies far = fx.carbon();
  for (std::size_t i = 0; i < both.spectrum.size(); ++i) {
    const double fp = both.spectrum.axis[i] / 1000.0;
    const double p = pumpExcitationProbability(far, fp, fx.config.pump, fx.resonator);
    CHECK(both.spectrum.intensity[i] == Approx(self.spectrum.intensity[i] * (1 - 0.3 * p)).epsilon(1e-12));
  }
}

TEST_CASE("DEER echo kind and optical mode scale E0") {
  DeerFixture fx;
  const auto stim = fx.run({});
  fx.config.echoKind = EchoKind::Refocused;
  const auto refoc = fx.run({});
  CHECK(stim.e0 / refoc.e0 == Approx(2.0));
  fx.config.opticalMode = OpticalMode::PulsedPrelude;
  const auto prelude = fx.run({});
  CHECK(prelude.e0 > 0.0);
  CHECK(prelude.e0 != Approx(refoc.e0));
  fx.config.stimulatedToRefocusedRatio = 0.5;
  CHECK_THROWS_AS(fx.run({}), std::invalid_argument);
  CHECK_THROWS_AS(parseEchoKind("hahn"), std::invalid_argument);
  CHECK(parseOpticalMode("pulsedPrelude") == OpticalMode::PulsedPrelude);
}

TEST_CASE("dip detection") {
  Spectrum flat;
  flat.axisKind = AxisKind::FrequencyMHz;
  for (double f = 9150.0; f < 9400.0; f += 1.0) {
    flat.axis.push_back(f);
    flat.intensity.push_back(1.0);
  }
  CHECK(dipDetect(flat, 0.01).empty());

  const auto s = lorentzDip(9243.3, 5.0, 0.4);
  const auto dips = dipDetect(s, 0.01);
  REQUIRE(dips.size() == 1);
  CHECK(dips[0].centerGHz == Approx(9.2433).epsilon(1e-5));
  CHECK(dips[0].depth == Approx(0.4).epsilon(0.02));
  CHECK(dipDetect(s, 0.5).empty());
}
