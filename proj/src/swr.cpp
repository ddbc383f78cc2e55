#include "v2sim/swr.hpp"

#include "v2sim/errors.hpp"
#include "v2sim/units.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace v2sim {

namespace {

constexpr double kNmToCm = 1e-7;
constexpr double kRootToleranceG = 1e-6;
constexpr double kSearchSpanG = 200000.0;

}  // namespace

void StripeSpec::validate() const {
  if (!(thicknessNm > 0.0 && widthNm > 0.0 && lengthUm > 0.0)) {
    throw std::invalid_argument("stripe dimensions must be positive");
  }
  if (!(ms4piG > 0.0 && g > 0.0 && exchangeErgPerCm > 0.0)) {
    throw std::invalid_argument("magnetic constants must be positive");
  }
  if (effectiveWidthNm && !(*effectiveWidthNm > 0.0)) {
    throw std::invalid_argument("effective width must be positive");
  }
}

double StripeSpec::exchangeLengthSq() const {
  const double ms = ms4piG / (4.0 * kPi);
  return 2.0 * exchangeErgPerCm / ms;
}

double prismDemagFactor(double aIn, double bIn, double cIn) {
  if (!(aIn > 0.0 && bIn > 0.0 && cIn > 0.0)) {
    throw std::invalid_argument("prism half-sizes must be positive");
  }
  using ld = long double;
  const ld a = aIn, b = bIn, c = cIn;
  const ld a2 = a * a, b2 = b * b, c2 = c * c;
  const ld r = std::sqrt(a2 + b2 + c2);
  const ld rab = std::sqrt(a2 + b2), rbc = std::sqrt(b2 + c2), rac = std::sqrt(a2 + c2);
  // log((r - x) / (r + x)) written without the cancelling difference
  auto logRatio = [](ld rest2, ld rr, ld x) { return std::log(rest2 / ((rr + x) * (rr + x))); };

  ld pi_d = 0.0L;
  pi_d += (b2 - c2) / (2 * b * c) * logRatio(b2 + c2, r, a);
  pi_d += (a2 - c2) / (2 * a * c) * logRatio(a2 + c2, r, b);
  pi_d -= b / (2 * c) * logRatio(b2, rab, a);
  pi_d -= a / (2 * c) * logRatio(a2, rab, b);
  pi_d += c / (2 * a) * logRatio(c2, rbc, b);
  pi_d += c / (2 * b) * logRatio(c2, rac, a);
  pi_d += 2 * std::atan(a * b / (c * r));
  pi_d += (a2 * a + b2 * b - 2 * c2 * c) / (3 * a * b * c);
  pi_d += (a2 + b2 - 2 * c2) / (3 * a * b * c) * r;
  pi_d += c / (a * b) * (rac + rbc);
  pi_d -= (rab * rab * rab + rbc * rbc * rbc + rac * rac * rac) / (3 * a * b * c);
  return static_cast<double>(pi_d / 3.14159265358979323846264338327950288L);
}

DemagFactors demagFactors(const StripeSpec& spec) {
  spec.validate();
  const double w = 0.5 * spec.widthNm;
  const double l = 0.5 * spec.lengthUm * 1000.0;
  const double t = 0.5 * spec.thicknessNm;
  return DemagFactors{prismDemagFactor(l, t, w), prismDemagFactor(w, t, l),
                      prismDemagFactor(w, l, t)};
}

double modeWavevector(const StripeSpec& spec, int n) {
  if (n < 0) throw std::invalid_argument("mode index must be non-negative");
  return n * kPi / (spec.quantizationWidthNm() * kNmToCm);
}

double dispersionFrequency(const StripeSpec& spec, double fieldG, double kRadPerCm,
                           double widthDemag) {
  const double internal = fieldG - widthDemag * spec.ms4piG;
  if (!(internal > 0.0)) {
    throw UnsaturatedStateError("internal field " + formatMetaNumber(internal) +
                                " G is not positive; the stripe is unsaturated");
  }
  const double kt = kRadPerCm * spec.thicknessNm * kNmToCm;
  const double dipolar = kt > 0.0 ? -std::expm1(-kt) / kt : 1.0;
  const double stiff = internal + spec.exchangeLengthSq() * kRadPerCm * kRadPerCm;
  const double gamma = spec.g * kBohrMHzPerGauss / 1000.0;
  return gamma * std::sqrt(stiff * (stiff + spec.ms4piG * dipolar));
}

double dispersionFrequency(const StripeSpec& spec, double fieldG, int n) {
  spec.validate();
  return dispersionFrequency(spec, fieldG, modeWavevector(spec, n), demagFactors(spec).width);
}

namespace {

std::optional<double> solveField(const StripeSpec& spec, double frequencyGHz, double k,
                                 double widthDemag) {
  const double saturation = widthDemag * spec.ms4piG;
  double lo = saturation * (1.0 + 1e-12) + 1e-9;
  double hi = saturation + kSearchSpanG;
  auto mismatch = [&](double h) { return dispersionFrequency(spec, h, k, widthDemag) - frequencyGHz; };
  if (mismatch(lo) > 0.0 || mismatch(hi) < 0.0) return std::nullopt;
  while (hi - lo > kRootToleranceG) {
    const double mid = 0.5 * (lo + hi);
    (mismatch(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<SwrMode> resonanceFieldsAtFrequency(const StripeSpec& spec, double frequencyGHz,
                                                int nMax) {
  spec.validate();
  if (!(frequencyGHz > 0.0)) throw std::invalid_argument("frequency must be positive");
  if (nMax < 1) throw std::invalid_argument("nMax must be >= 1");
  const double nw = demagFactors(spec).width;
  std::vector<SwrMode> out;
  for (int n = 1; n <= nMax; ++n) {
    const double k = modeWavevector(spec, n);
    if (auto h = solveField(spec, frequencyGHz, k, nw)) out.push_back({n, k, *h});
  }
  return out;
}

double uniformModeField(const StripeSpec& spec, double frequencyGHz) {
  spec.validate();
  const auto h = solveField(spec, frequencyGHz, 0.0, demagFactors(spec).width);
  if (!h) throw NumericalError("no uniform-mode resonance in the saturated range");
  return *h;
}

SwrSpectrum swrSpectrum(const StripeSpec& spec, double frequencyGHz, double fieldLowG,
                        double fieldHighG, std::size_t nPoints, double lineWidthPPG, int nMax) {
  if (!(fieldHighG > fieldLowG)) throw std::invalid_argument("field range must be non-empty");
  SwrSpectrum out;
  out.modes = resonanceFieldsAtFrequency(spec, frequencyGHz, nMax);
  const LineShape abs{LineShapeKind::LorentzianAbsorption, lineWidthPPG};
  const LineShape der{LineShapeKind::LorentzianDerivative, lineWidthPPG};
  out.absorption.axisKind = out.derivative.axisKind = AxisKind::FieldG;
  out.absorption.axis = linspace(fieldLowG, fieldHighG, nPoints);
  out.derivative.axis = out.absorption.axis;
  out.absorption.intensity.assign(nPoints, 0.0);
  out.derivative.intensity.assign(nPoints, 0.0);
  for (std::size_t i = 0; i < nPoints; ++i) {
    for (const SwrMode& m : out.modes) {
      const double x = out.absorption.axis[i] - m.resonanceFieldG;
      out.absorption.intensity[i] += abs(x);
      out.derivative.intensity[i] += der(x);
    }
  }
  for (Spectrum* s : {&out.absorption, &out.derivative}) {
    s->meta["fMW_GHz"] = formatMetaNumber(frequencyGHz);
    s->meta["modes"] = std::to_string(out.modes.size());
    s->validate();
  }
  return out;
}

}  // namespace v2sim
