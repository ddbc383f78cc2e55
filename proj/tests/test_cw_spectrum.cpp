#include "oracles.hpp"

#include "v2sim/cw_spectrum.hpp"
#include "v2sim/pump_relax.hpp"

#include <doctest.h>

using namespace v2sim;
using doctest::Approx;

namespace {

double valueAt(const Spectrum& s, double field) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s.axis[i] <= field && field <= s.axis[i + 1]) {
      const double t = (field - s.axis[i]) / (s.axis[i + 1] - s.axis[i]);
      return s.intensity[i] * (1 - t) + s.intensity[i + 1] * t;
    }
  }
  return 0.0;
}

PumpModel pumpAt(const SpinSystem& sys, double epsilon, PumpPolarity pol = PumpPolarity::IntoHalf) {
  return makePumpModel(sys, FieldOrientation{3320.5, 0.0}, epsilon, 139.0, 354.0, 300.0, pol);
}

}  // namespace

TEST_CASE("line shapes: unit peak-to-peak, sign and width") {
  for (auto kind : {LineShapeKind::LorentzianDerivative, LineShapeKind::GaussianDerivative}) {
    const LineShape ls{kind, 3.0};
    // extrema sit at +-widthPP/2
    CHECK(ls(-1.5) - ls(1.5) == Approx(1.0).epsilon(1e-12));
    CHECK(ls(-1.5) > 0.0);
    CHECK(ls(-1.4) < ls(-1.5));
    CHECK(ls(-1.6) < ls(-1.5));
    CHECK(ls(0.0) == Approx(0.0).scale(1.0));
    CHECK(ls.isDerivative());
  }
  for (auto kind : {LineShapeKind::LorentzianAbsorption, LineShapeKind::GaussianAbsorption}) {
    const LineShape ls{kind, 3.0};
    CHECK(ls(0.0) == Approx(1.0));
    CHECK(ls(2.0) == Approx(ls(-2.0)));
    CHECK_FALSE(ls.isDerivative());
  }
  // Lorentzian half width at half maximum is sqrt(3)/2 of the pp width
  const LineShape lor{LineShapeKind::LorentzianAbsorption, 3.0};
  CHECK(lor(std::sqrt(3.0) / 2.0 * 3.0) == Approx(0.5));
  const LineShape gau{LineShapeKind::GaussianAbsorption, 3.0};
  CHECK(gau(1.5) == Approx(std::exp(-0.5)));
  CHECK(parseLineShapeKind(lineShapeName(LineShapeKind::GaussianDerivative)) == LineShapeKind::GaussianDerivative);
  CHECK_THROWS_AS(parseLineShapeKind("voigt"), std::invalid_argument);
}

TEST_CASE("derivative line integrates to zero over a symmetric window") {
  for (auto kind : {LineShapeKind::LorentzianDerivative, LineShapeKind::GaussianDerivative}) {
    const LineShape ls{kind, 3.0};
    const auto x = linspace(-60.0, 60.0, 24001);
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (ls(x[i]) + ls(x[i - 1])) * (x[i] - x[i - 1]);
    CHECK(std::abs(acc) < 1e-3);
  }
}

TEST_CASE("thermal sweep at 9.369 GHz: three same-sign lines 24.97 G apart") {
  SpinSystem s;
  CwSettings cw;
  const auto lines = resonanceFields(s, 0.0, 9.369, {3250, 3450});
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].fieldG - lines[0].fieldG == Approx(24.97).epsilon(0.02 / 24.97));
  CHECK(lines[2].fieldG - lines[1].fieldG == Approx(24.97).epsilon(0.02 / 24.97));
  const auto w = resonanceWeights(s, 0.0, 9.369, lines, cw);
  for (double v : w) CHECK(v > 0.0);

  const Spectrum sp = fieldSweep(s, 0.0, 9.369, {3250, 3450}, 4001, cw);
  for (const Resonance& r : lines) {
    // derivative: positive lobe below, negative above the centre
    CHECK(valueAt(sp, r.fieldG - 1.5) > 0.0);
    CHECK(valueAt(sp, r.fieldG + 1.5) < 0.0);
  }
  CHECK(sp.meta.at("pump") == "off");
  CHECK(sp.axisKind == AxisKind::FieldG);
}

TEST_CASE("thermal central line at theta=0 has unit peak-to-peak amplitude") {
  SpinSystem s;
  CwSettings cw;
  const auto lines = resonanceFields(s, 0.0, 9.308, {3250, 3450});
  const double c = lines[1].fieldG;
  const Spectrum sp = fieldSweep(s, 0.0, 9.308, {c - 10, c + 10}, 20001, cw);
  const auto [lo, hi] = std::minmax_element(sp.intensity.begin(), sp.intensity.end());
  // neighbouring lines 25 G away leave a small Lorentzian tail
  CHECK(*hi - *lo == Approx(1.0).epsilon(0.02));
}

TEST_CASE("equal populations give an identically zero spectrum") {
  SpinSystem s;
  CwSettings cw;
  cw.populations = uniformPopulations(4);
  const Spectrum sp = fieldSweep(s, 0.0, 9.308, {3250, 3450}, 501, cw);
  for (double v : sp.intensity) CHECK(v == 0.0);
}

TEST_CASE("no resonance in range gives a flat zero spectrum") {
  SpinSystem s;
  const Spectrum sp = fieldSweep(s, 0.0, 9.308, {1000, 1100}, 101, CwSettings{});
  for (double v : sp.intensity) CHECK(v == 0.0);
}

TEST_CASE("pumped populations invert exactly one outer line") {
  SpinSystem s;
  CwSettings cw;
  cw.populations = pumpAt(s, 0.05).illuminatedFixedPoint();
  const auto lines = resonanceFields(s, 0.0, 9.308, {3250, 3450});
  const auto w = resonanceWeights(s, 0.0, 9.308, lines, cw);
  REQUIRE(w.size() == 3);
  CHECK(w[0] > 0.0);  // low field: induced absorption
  CHECK(w[2] < 0.0);  // high field: stimulated emission
  const Spectrum sp = fieldSweep(s, 0.0, 9.308, {3250, 3450}, 4001, cw);
  CHECK(valueAt(sp, lines[0].fieldG - 1.5) > 0.0);
  CHECK(valueAt(sp, lines[2].fieldG - 1.5) < 0.0);

  cw.populations = pumpAt(s, 0.05, PumpPolarity::IntoThreeHalves).illuminatedFixedPoint();
  const auto flipped = resonanceWeights(s, 0.0, 9.308, lines, cw);
  CHECK((flipped[0] > 0.0) != (flipped[2] > 0.0));
}

TEST_CASE("intensity is linear in the population difference") {
  SpinSystem s;
  const PopulationState base = pumpAt(s, 0.05).illuminatedFixedPoint();
  const PopulationState flat = uniformPopulations(4);
  CwSettings a, b;
  a.populations = base;
  PopulationState half = base;
  for (std::size_t i = 0; i < 4; ++i) half.p[i] = flat.p[i] + 0.5 * (base.p[i] - flat.p[i]);
  b.populations = half;
  const Spectrum sa = fieldSweep(s, 20.0, 9.308, {3250, 3450}, 801, a);
  const Spectrum sb = fieldSweep(s, 20.0, 9.308, {3250, 3450}, 801, b);
  double scale = 0.0;
  for (double v : sa.intensity) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(std::abs(sb.intensity[i] - 0.5 * sa.intensity[i]) < 1e-12 * scale);
}

TEST_CASE("grid refinement leaves shared samples unchanged") {
  SpinSystem s;
  const Spectrum coarse = fieldSweep(s, 30.0, 9.308, {3250, 3450}, 401, CwSettings{});
  const Spectrum fine = fieldSweep(s, 30.0, 9.308, {3250, 3450}, 801, CwSettings{});
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    CHECK(fine.axis[2 * i] == Approx(coarse.axis[i]).epsilon(1e-14));
    CHECK(std::abs(fine.intensity[2 * i] - coarse.intensity[i]) <= 1e-9 * std::max(1.0, std::abs(coarse.intensity[i])));
  }
}

TEST_CASE("rotational pattern: 4D splitting, magic-angle collapse, 90 degree reversal") {
  SpinSystem s;
  const double magic = std::acos(1.0 / std::sqrt(3.0)) * 180.0 / kPi;
  const RotationalPattern rp = rotationalPattern(s, 9.369, {0.0, magic, 90.0}, {3250, 3450}, 401, CwSettings{});
  REQUIRE(rp.positions.size() == 3);
  REQUIRE(rp.spectra.size() == 3);
  auto field = [&](std::size_t a, int lower) {
    for (const Resonance& r : rp.positions[a].lines) {
      if (r.levels.lower == lower && r.levels.upper == lower + 1) return r.fieldG;
    }
    FAIL("transition missing");
    return 0.0;
  };
  const double split0 = field(0, 2) - field(0, 0);
  CHECK(std::abs(split0) == Approx(4 * 35.0 / larmorMHz(2.0028, 1.0)).epsilon(0.2 / 49.95));
  CHECK(std::abs(split0) == Approx(49.95).epsilon(0.3 / 49.95));
  double lo = 1e9, hi = -1e9;
  for (const Resonance& r : rp.positions[1].lines) {
    lo = std::min(lo, r.fieldG);
    hi = std::max(hi, r.fieldG);
  }
  CHECK(hi - lo < 3.0);
  const double bound = 0.1 + 35.0 * 35.0 / (9369.0 * larmorMHz(2.0028, 1.0));
  CHECK(std::abs(field(1, 0) - field(1, 1)) < bound);
  const double split90 = field(2, 2) - field(2, 0);
  CHECK(std::abs(split90 - (-0.5 * split0)) < 0.3);
  CHECK(rp.spectra[1].meta.at("theta_deg").substr(0, 5) == "54.73");
  CHECK_THROWS_AS(rotationalPattern(s, 9.369, {-5.0}, {3250, 3450}, 11, CwSettings{}), std::invalid_argument);
}

TEST_CASE("pattern at theta equals pattern at -theta") {
  SpinSystem s;
  for (double th : {10.0, 35.0, 80.0}) {
    const double r = degToRad(th);
    const auto a = oracle::eigenvaluesGeneral(hamiltonian(s, Eigen::Vector3d(3300 * std::sin(r), 0, 3300 * std::cos(r))));
    const auto b = oracle::eigenvaluesGeneral(hamiltonian(s, Eigen::Vector3d(-3300 * std::sin(r), 0, 3300 * std::cos(r))));
    for (int k = 0; k < 4; ++k) CHECK(a[k] == Approx(b[k]).epsilon(1e-12));
  }
}
