#include "v2sim/fitting.hpp"
#include "v2sim/pump_relax.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace v2sim;
using doctest::Approx;

namespace {

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(a + (b - a) * i / (n - 1));
  return t;
}

std::vector<double> sample(const std::vector<double>& t, const ExpParams& p) {
  std::vector<double> y;
  for (double v : t) y.push_back(p(v));
  return y;
}

}  // namespace

TEST_CASE("noiseless exponential is recovered") {
  const auto t = grid(0.0, 240.0, 120);
  const ExpParams truth{0.8, 48.0, 0.02};
  const auto r = fitMonoExponential(t, sample(t, truth));
  CHECK(r.converged);
  CHECK_FALSE(r.atBound);
  CHECK(r.params.timeConstantUs == Approx(48.0).epsilon(1e-6));
  CHECK(r.params.amplitude == Approx(0.8).epsilon(1e-6));
  CHECK(r.params.offset == Approx(0.02).epsilon(1e-6));
}

TEST_CASE("shifted time origin maps the amplitude back") {
  const auto t = grid(500.0, 900.0, 80);
  const ExpParams truth{-3.0, 120.0, 1.0};
  const auto r = fitMonoExponential(t, sample(t, truth));
  CHECK(r.converged);
  CHECK(r.params.timeConstantUs == Approx(120.0).epsilon(1e-6));
  CHECK(r.params.amplitude == Approx(-3.0).epsilon(1e-6));
}

TEST_CASE("seeded 1% noise keeps tau within 2%") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto t = grid(0.0, 240.0, 200);
  auto y = sample(t, {1.0, 48.0, 0.0});
  for (double& v : y) v += noise(rng);
  const auto r = fitMonoExponential(t, y);
  CHECK(r.converged);
  CHECK(r.params.timeConstantUs == Approx(48.0).epsilon(0.02));
  CHECK(r.stdErrors.timeConstantUs > 0.0);
  CHECK(r.stdErrors.timeConstantUs < 2.0);
}

TEST_CASE("degenerate traces do not converge") {
  const auto t = grid(0.0, 10.0, 20);
  const auto r = fitMonoExponential(t, std::vector<double>(20, 0.3));
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK_THROWS_AS(fitMonoExponential({0, 1, 2}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(fitMonoExponential({0, 1, 1, 2}, {1, 2, 3, 4}), std::invalid_argument);
  // straight line: tau runs to its bound
  const auto line = fitMonoExponential(t, sample(t, {0.0, 1.0, 0.0}));
  CHECK_FALSE(line.converged);
}

TEST_CASE("refitting from the solution is idempotent") {
  const auto t = grid(0.0, 300.0, 100);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.02);
  auto y = sample(t, {2.0, 70.0, -0.5});
  for (double& v : y) v += noise(rng);
  const auto first = fitMonoExponential(t, y);
  const auto second = fitMonoExponential(t, y, first.params);
  CHECK(second.converged);
  CHECK(second.iterations <= 2);
  CHECK(second.params.timeConstantUs == Approx(first.params.timeConstantUs).epsilon(1e-10));
  CHECK(second.params.amplitude == Approx(first.params.amplitude).epsilon(1e-10));
}

TEST_CASE("fit is equivariant under value scaling and time shifts") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    const ExpParams truth{0.5 + u(rng), 20.0 + 100.0 * u(rng), u(rng) - 0.5};
    const auto t = grid(0.0, 5.0 * truth.timeConstantUs, 150);
    auto y = sample(t, truth);
    for (double& v : y) v += noise(rng);
    const auto base = fitMonoExponential(t, y);
    REQUIRE(base.converged);

    const double c = 0.1 + 10.0 * u(rng);
    auto ys = y;
    for (double& v : ys) v *= c;
    const auto scaled = fitMonoExponential(t, ys);
    CHECK(scaled.params.timeConstantUs == Approx(base.params.timeConstantUs).epsilon(1e-9));
    CHECK(scaled.params.amplitude == Approx(c * base.params.amplitude).epsilon(1e-9));
    CHECK(scaled.params.offset == Approx(c * base.params.offset).epsilon(1e-9).scale(1e-12));

    const double shift = 1000.0 * u(rng);
    auto ts = t;
    for (double& v : ts) v += shift;
    const auto moved = fitMonoExponential(ts, y);
    CHECK(moved.params.timeConstantUs == Approx(base.params.timeConstantUs).epsilon(1e-6));
    CHECK(moved.params.amplitude ==
          Approx(base.params.amplitude * std::exp(shift / base.params.timeConstantUs)).epsilon(1e-6));
  }
}

TEST_CASE("gradient vanishes at the optimum") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto t = grid(0.0, 200.0, 120);
  auto y = sample(t, {1.0, 40.0, 0.1});
  for (double& v : y) v += noise(rng);
  const auto r = fitMonoExponential(t, y);
  const Eigen::Vector3d g = exponentialGradient(t, y, r.params);
  const Eigen::Vector3d scale(1.0, r.params.timeConstantUs, 1.0);
  CHECK(g.cwiseProduct(scale).norm() < 1e-6 * r.residualNorm * std::sqrt(double(t.size())));
}

TEST_CASE("analytic Jacobian matches central differences") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto t = grid(0.0, 100.0, 30);
  for (int trial = 0; trial < 50; ++trial) {
    const ExpParams p{2.0 * u(rng) - 1.0, 5.0 + 80.0 * u(rng), u(rng)};
    const FitJacobian j = exponentialJacobian(t, p);
    for (int k = 0; k < 3; ++k) {
      ExpParams plus = p, minus = p;
      double* fp = k == 0 ? &plus.amplitude : k == 1 ? &plus.timeConstantUs : &plus.offset;
      double* fm = k == 0 ? &minus.amplitude : k == 1 ? &minus.timeConstantUs : &minus.offset;
      const double h = 1e-6 * std::max(1.0, std::abs(*fp));
      *fp += h;
      *fm -= h;
      Eigen::VectorXd fd(static_cast<Eigen::Index>(t.size()));
      for (std::size_t i = 0; i < t.size(); ++i) {
        fd(static_cast<Eigen::Index>(i)) = (plus(t[i]) - minus(t[i])) / (2 * h);
      }
      CHECK((j.col(k) - fd).norm() < 1e-4 * fd.norm());
    }
  }
}

TEST_CASE("piecewise recovery fit returns Top_eff and T1") {
  const SpinSystem sys;
  const PumpModel model = makePumpModel(sys, FieldOrientation{3320.5, 0.0}, 0.05, 139.0, 354.0);
  std::vector<double> delays;
  for (double d = 0.0; d <= 2500.0; d += 10.0) delays.push_back(d);
  const Spectrum trace = echoDetectedRecoveryTrace(model, RecoveryTiming{}, delays);
  const auto fit = fitPiecewiseRecovery(trace, 1200.0, 200.0);
  REQUIRE(fit.duringLight.converged);
  REQUIRE(fit.afterLight.converged);
  const auto times = recoveryTimes(fit);
  CHECK(times.effectivePumpUs == Approx(model.effectivePumpTimeUs()).epsilon(0.01));
  CHECK(times.t1Us == Approx(354.0).epsilon(0.02));
  CHECK(times.bareOpticalUs == Approx(139.0).epsilon(0.02));
  CHECK(std::abs(fit.boundaryGap) < 1e-3);

  CHECK_THROWS_WITH_AS(fitPiecewiseRecovery(trace, 210.0, 200.0),
                       "during-light segment has fewer than 4 samples", std::invalid_argument);
  CHECK_THROWS_WITH_AS(fitPiecewiseRecovery(trace, 2480.0, 200.0),
                       "after-light segment has fewer than 4 samples", std::invalid_argument);
}

TEST_CASE("without optical polarization the recovery fit reports no decay") {
  const SpinSystem sys;
  const PumpModel model = makePumpModel(sys, FieldOrientation{3320.5, 0.0}, 0.0, 139.0, 354.0);
  std::vector<double> delays;
  for (double d = 0.0; d <= 2500.0; d += 10.0) delays.push_back(d);
  const Spectrum trace = echoDetectedRecoveryTrace(model, RecoveryTiming{}, delays);
  const auto fit = fitPiecewiseRecovery(trace, 1200.0, 200.0);
  CHECK_FALSE(fit.duringLight.converged);
  CHECK_FALSE(fit.afterLight.converged);
  CHECK_THROWS_AS(recoveryTimes(fit), std::invalid_argument);
}
