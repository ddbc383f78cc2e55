#pragma once

#include "v2sim/spectrum.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace v2sim {

/// y(t) = amplitude * exp(-t / timeConstant) + offset
struct ExpParams {
  double amplitude = 0.0;
  double timeConstantUs = 1.0;
  double offset = 0.0;

  double operator()(double t) const;
};

struct FitResult {
  ExpParams params;
  ExpParams stdErrors;
  double residualNorm = 0.0;
  bool converged = false;
  bool atBound = false;  ///< time constant pushed to the search limits
  int iterations = 0;
  std::string diagnostic;
};

using FitJacobian = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Analytic Jacobian of the model with respect to (amplitude, timeConstant, offset).
FitJacobian exponentialJacobian(const std::vector<double>& t, const ExpParams& p);

/// Gradient of 0.5 * sum (model - y)^2.
Eigen::Vector3d exponentialGradient(const std::vector<double>& t, const std::vector<double>& y,
                                    const ExpParams& p);

/// Log-linear estimate on baseline-subtracted data.
ExpParams initialExponentialGuess(const std::vector<double>& t, const std::vector<double>& y);

/// Damped Gauss-Newton (Levenberg-Marquardt) fit with unit weights.
FitResult fitMonoExponential(const std::vector<double>& t, const std::vector<double>& y,
                             std::optional<ExpParams> guess = std::nullopt);
FitResult fitMonoExponential(const Spectrum& trace, std::optional<ExpParams> guess = std::nullopt);

struct PiecewiseFit {
  FitResult duringLight;
  FitResult afterLight;
  double boundaryGap = 0.0;  ///< during-fit minus after-fit at the light-off time
};

/// Independent fits of the illuminated segment [lightOn, lightOff) and the dark
/// segment [lightOff, end]. lightOn defaults to the first sample.
PiecewiseFit fitPiecewiseRecovery(const Spectrum& trace, double lightOffTimeUs,
                                  std::optional<double> lightOnTimeUs = std::nullopt);

struct RecoveryTimes {
  double effectivePumpUs = 0.0;  ///< illuminated time constant, 1/(1/Top + 1/T1)
  double bareOpticalUs = 0.0;    ///< Top
  double t1Us = 0.0;
};

RecoveryTimes recoveryTimes(const PiecewiseFit& fit);

}  // namespace v2sim
