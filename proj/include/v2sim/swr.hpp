#pragma once

#include "v2sim/spectrum.hpp"

#include <optional>
#include <vector>

namespace v2sim {

/// Ferromagnetic nanostripe magnetized in-plane along its width.
struct StripeSpec {
  double thicknessNm = 100.0;
  double widthNm = 300.0;
  double lengthUm = 100.0;
  double ms4piG = 11700.0;               ///< saturation induction 4 pi Ms
  double g = 2.00;
  double exchangeErgPerCm = 1.3e-6;      ///< exchange stiffness A (not printed for the Py sample)
  std::optional<double> effectiveWidthNm;  ///< quantization width; the geometric width when empty

  void validate() const;
  double quantizationWidthNm() const { return effectiveWidthNm.value_or(widthNm); }
  /// 2A/Ms in G cm^2
  double exchangeLengthSq() const;
};

struct DemagFactors {
  double width = 0.0;      ///< along the applied field
  double length = 0.0;
  double thickness = 0.0;  ///< film normal
};

/// Closed-form demagnetizing factors of a uniformly magnetized rectangular prism.
DemagFactors demagFactors(const StripeSpec& spec);

/// Prism factor along the axis with half-size c (Aharoni's closed form).
double prismDemagFactor(double a, double b, double c);

/// Quantized wavevector k_n = n pi / w_eff in rad/cm.
double modeWavevector(const StripeSpec& spec, int n);

/// Dipole-exchange mode frequency (GHz) for wavevector parallel to M.
double dispersionFrequency(const StripeSpec& spec, double fieldG, int n);
/// Same with an explicit wavevector (rad/cm) and width demagnetizing factor.
double dispersionFrequency(const StripeSpec& spec, double fieldG, double kRadPerCm,
                           double widthDemag);

struct SwrMode {
  int n = 1;
  double kRadPerCm = 0.0;
  double resonanceFieldG = 0.0;
};

/// Mode fields where dispersionFrequency equals fMW, n = 1..nMax. Modes without a
/// root in the saturated range are omitted.
std::vector<SwrMode> resonanceFieldsAtFrequency(const StripeSpec& spec, double frequencyGHz,
                                                int nMax);

/// Uniform-mode (k = 0) resonance field of the same stripe.
double uniformModeField(const StripeSpec& spec, double frequencyGHz);

struct SwrSpectrum {
  Spectrum absorption;
  Spectrum derivative;
  std::vector<SwrMode> modes;
};

/// Equal-weight Lorentzian lines at the mode fields.
SwrSpectrum swrSpectrum(const StripeSpec& spec, double frequencyGHz, double fieldLowG,
                        double fieldHighG, std::size_t nPoints, double lineWidthPPG, int nMax);

}  // namespace v2sim
