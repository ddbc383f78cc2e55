#pragma once

// Units used throughout: field in Gauss, frequency in MHz (GHz where noted),
// time in microseconds (pulse lengths in ns where noted).

namespace v2sim {

/// Bohr magneton over Planck constant, MHz per Gauss per unit g.
inline constexpr double kBohrMHzPerGauss = 1.3996245;

/// Boltzmann constant over Planck constant, MHz per kelvin.
inline constexpr double kBoltzmannMHzPerKelvin = 20836.61912;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kDefaultTemperatureK = 300.0;

/// Electron Larmor frequency (MHz) for g at field B (G).
inline constexpr double larmorMHz(double g, double fieldG) {
  return g * kBohrMHzPerGauss * fieldG;
}

inline constexpr double degToRad(double deg) { return deg * kPi / 180.0; }

}  // namespace v2sim
