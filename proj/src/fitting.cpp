#include "v2sim/fitting.hpp"

#include "v2sim/pump_relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace v2sim {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kStepTolerance = 1e-8;
constexpr double kMaxTauPerSpan = 1e3;

struct Shifted {
  std::vector<double> t;
  double origin = 0.0;
};

Shifted shiftToOrigin(const std::vector<double>& t) {
  Shifted s{t, t.front()};
  for (double& v : s.t) v -= s.origin;
  return s;
}

double sumSquares(const std::vector<double>& t, const std::vector<double>& y, const ExpParams& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = p(t[i]) - y[i];
    acc += r * r;
  }
  return acc;
}

Eigen::Vector3d asVector(const ExpParams& p) { return {p.amplitude, p.timeConstantUs, p.offset}; }
ExpParams fromVector(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }

}  // namespace

double ExpParams::operator()(double t) const {
  return amplitude * std::exp(-t / timeConstantUs) + offset;
}

FitJacobian exponentialJacobian(const std::vector<double>& t, const ExpParams& p) {
  FitJacobian j(static_cast<Eigen::Index>(t.size()), 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = std::exp(-t[i] / p.timeConstantUs);
    const auto r = static_cast<Eigen::Index>(i);
    j(r, 0) = e;
    j(r, 1) = p.amplitude * e * t[i] / (p.timeConstantUs * p.timeConstantUs);
    j(r, 2) = 1.0;
  }
  return j;
}

Eigen::Vector3d exponentialGradient(const std::vector<double>& t, const std::vector<double>& y,
                                    const ExpParams& p) {
  const FitJacobian j = exponentialJacobian(t, p);
  Eigen::VectorXd r(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) r(static_cast<Eigen::Index>(i)) = p(t[i]) - y[i];
  return j.transpose() * r;
}

ExpParams initialExponentialGuess(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = y.size();
  const double span = t.back() - t.front();
  // baseline from the last tenth of the trace
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double baseline = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) baseline += y[i];
  baseline /= static_cast<double>(tail);

  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v - baseline));
  const double sign = (y.front() - baseline) >= 0.0 ? 1.0 : -1.0;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sign * (y[i] - baseline);
    if (d <= 0.05 * peak) continue;
    const double ly = std::log(d);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++m;
  }
  ExpParams guess{sign * peak, span / 3.0, baseline};
  if (m >= 2) {
    const double den = m * sxx - sx * sx;
    if (den > 0.0) {
      const double slope = (m * sxy - sx * sy) / den;
      const double intercept = (sy - slope * sx) / m;
      if (slope < 0.0) {
        guess.timeConstantUs = -1.0 / slope;
        guess.amplitude = sign * std::exp(intercept);
      }
    }
  }
  return guess;
}

FitResult fitMonoExponential(const std::vector<double>& tIn, const std::vector<double>& y,
                             std::optional<ExpParams> guess) {
  if (tIn.size() != y.size()) throw std::invalid_argument("time and value lengths differ");
  if (tIn.size() < 4) throw std::invalid_argument("exponential fit needs at least 4 samples");
  for (std::size_t i = 1; i < tIn.size(); ++i) {
    if (!(tIn[i] > tIn[i - 1])) throw std::invalid_argument("time axis must be increasing");
  }
  FitResult result;
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double scaleY = std::max(std::abs(*ymin), std::abs(*ymax));
  if (*ymax - *ymin <= 1e-12 * scaleY || *ymax == *ymin) {
    result.params = {0.0, std::numeric_limits<double>::infinity(), *ymin};
    result.diagnostic = "constant trace: no decay to fit";
    return result;
  }

  // work on a time axis starting at zero; amplitude is mapped back at the end
  const Shifted shifted = shiftToOrigin(tIn);
  const std::vector<double>& t = shifted.t;
  const double span = t.back();
  const double maxTau = kMaxTauPerSpan * span;
  ExpParams p = guess ? *guess : initialExponentialGuess(tIn, y);
  if (guess) p.amplitude *= std::exp(-shifted.origin / p.timeConstantUs);
  p.timeConstantUs = std::clamp(p.timeConstantUs, 1e-6 * span, maxTau);

  const Eigen::Vector3d scale(std::max(scaleY, 1e-300), span, std::max(scaleY, 1e-300));
  double cost = sumSquares(t, y, p);
  double lambda = 1e-3;
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    result.iterations = iter;
    const FitJacobian j = exponentialJacobian(t, p);
    Eigen::VectorXd r(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) r(static_cast<Eigen::Index>(i)) = p(t[i]) - y[i];
    const Eigen::Matrix3d jtj = j.transpose() * j;
    const Eigen::Vector3d grad = j.transpose() * r;

    bool accepted = false;
    bool tiny = false;
    while (lambda < 1e16) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector3d step = damped.ldlt().solve(-grad);
      const Eigen::Vector3d current = asVector(p);
      const double relStep =
          (step.array().abs() / current.array().abs().max(scale.array() * 1e-6)).maxCoeff();
      tiny = relStep < kStepTolerance;
      const ExpParams trial = fromVector(current + step);
      const bool valid = trial.timeConstantUs > 0.0 && trial.timeConstantUs <= maxTau &&
                         std::isfinite(trial.amplitude) && std::isfinite(trial.offset);
      const double trialCost = valid ? sumSquares(t, y, trial) : std::numeric_limits<double>::infinity();
      if (trialCost < cost) {
        p = trial;
        cost = trialCost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      if (tiny) break;
      lambda *= 10.0;
    }
    if (tiny) {
      result.converged = true;
      // a few undamped Gauss-Newton steps take the answer to machine precision;
      // the cost is flat to rounding here, so accept while the steps shrink
      double lastStep = std::numeric_limits<double>::infinity();
      for (int polish = 0; polish < 3; ++polish) {
        const FitJacobian jp = exponentialJacobian(t, p);
        Eigen::VectorXd rp(static_cast<Eigen::Index>(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i) rp(static_cast<Eigen::Index>(i)) = p(t[i]) - y[i];
        const Eigen::Vector3d step = (jp.transpose() * jp).ldlt().solve(-(jp.transpose() * rp));
        const double rel =
            (step.array().abs() / asVector(p).array().abs().max(scale.array() * 1e-6)).maxCoeff();
        if (!(rel < kStepTolerance) || !(rel < lastStep)) break;
        lastStep = rel;
        p = fromVector(asVector(p) + step);
      }
      cost = sumSquares(t, y, p);
      break;
    }
    if (!accepted) {
      result.diagnostic = "damping exhausted without reducing the residual";
      break;
    }
  }
  if (!result.converged && result.diagnostic.empty()) {
    result.diagnostic = "iteration limit reached";
  }
  if (p.timeConstantUs >= maxTau * (1.0 - 1e-6) || p.timeConstantUs <= 1e-6 * span) {
    result.atBound = true;
    result.converged = false;
    result.diagnostic = "time constant driven to its bound: trace is not a decaying exponential";
  }

  const std::size_t n = t.size();
  const FitJacobian j = exponentialJacobian(t, p);
  const Eigen::Matrix3d jtj = j.transpose() * j;
  const double variance = n > 3 ? cost / static_cast<double>(n - 3) : 0.0;
  Eigen::Matrix3d cov = variance * jtj.inverse();

  // map amplitude back to the caller's time origin: A0 = A * exp(origin / tau)
  const double growth = std::exp(shifted.origin / p.timeConstantUs);
  Eigen::Matrix3d map = Eigen::Matrix3d::Identity();
  map(0, 0) = growth;
  map(0, 1) = -p.amplitude * growth * shifted.origin / (p.timeConstantUs * p.timeConstantUs);
  cov = map * cov * map.transpose();
  p.amplitude *= growth;

  result.params = p;
  result.stdErrors = {std::sqrt(std::max(0.0, cov(0, 0))), std::sqrt(std::max(0.0, cov(1, 1))),
                      std::sqrt(std::max(0.0, cov(2, 2)))};
  result.residualNorm = std::sqrt(cost);
  return result;
}

FitResult fitMonoExponential(const Spectrum& trace, std::optional<ExpParams> guess) {
  trace.validate();
  return fitMonoExponential(trace.axis, trace.intensity, guess);
}

PiecewiseFit fitPiecewiseRecovery(const Spectrum& trace, double lightOffTimeUs,
                                  std::optional<double> lightOnTimeUs) {
  trace.validate();
  if (trace.size() == 0) throw std::invalid_argument("empty trace");
  const double lightOn = lightOnTimeUs.value_or(trace.axis.front());
  std::vector<double> t1, y1, t2, y2;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double t = trace.axis[i];
    if (t < lightOn) continue;
    if (t < lightOffTimeUs) {
      t1.push_back(t);
      y1.push_back(trace.intensity[i]);
    } else {
      t2.push_back(t);
      y2.push_back(trace.intensity[i]);
    }
  }
  if (t1.size() < 4) throw std::invalid_argument("during-light segment has fewer than 4 samples");
  if (t2.size() < 4) throw std::invalid_argument("after-light segment has fewer than 4 samples");
  PiecewiseFit out{fitMonoExponential(t1, y1), fitMonoExponential(t2, y2), 0.0};
  if (out.duringLight.converged && out.afterLight.converged) {
    out.boundaryGap = out.duringLight.params(lightOffTimeUs) - out.afterLight.params(lightOffTimeUs);
  }
  return out;
}

RecoveryTimes recoveryTimes(const PiecewiseFit& fit) {
  if (!fit.duringLight.converged || !fit.afterLight.converged) {
    throw std::invalid_argument("recovery times need two converged fits");
  }
  RecoveryTimes out;
  out.effectivePumpUs = fit.duringLight.params.timeConstantUs;
  out.t1Us = fit.afterLight.params.timeConstantUs;
  out.bareOpticalUs = bareOpticalTimeUs(out.effectivePumpUs, out.t1Us);
  return out;
}

}  // namespace v2sim
