#include "v2sim/fitting.hpp"
#include "v2sim/pump_relax.hpp"
#include "v2sim/units.hpp"

#include <doctest.h>

#include <random>

using namespace v2sim;
using doctest::Approx;

namespace {

PumpModel model(double epsilon = 0.05, PumpPolarity pol = PumpPolarity::IntoHalf) {
  return makePumpModel(SpinSystem{}, FieldOrientation{3297.0, 0.0}, epsilon, 139.0, 354.0, 300.0, pol);
}

double distance(const PopulationState& a, const PopulationState& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.p.size(); ++i) d = std::max(d, std::abs(a.p[i] - b.p[i]));
  return d;
}

double sum(const PopulationState& s) {
  double acc = 0.0;
  for (double v : s.p) acc += v;
  return acc;
}

}  // namespace

TEST_CASE("optical fixed point for S=3/2") {
  PumpModel m = model(0.05);
  m.thermal = uniformPopulations(4);
  const PopulationState p = m.pumpSteadyState();
  CHECK(p.p[0] == Approx(0.20));
  CHECK(p.p[1] == Approx(0.30));
  CHECK(p.p[2] == Approx(0.30));
  CHECK(p.p[3] == Approx(0.20));
  PumpModel mq = model(0.05, PumpPolarity::IntoThreeHalves);
  mq.thermal = uniformPopulations(4);
  const PopulationState q = mq.pumpSteadyState();
  CHECK(q.p[0] == Approx(0.30));
  CHECK(q.p[1] == Approx(0.20));
  CHECK(m.effectivePumpTimeUs() == Approx(1.0 / (1.0 / 139.0 + 1.0 / 354.0)));
  CHECK(bareOpticalTimeUs(m.effectivePumpTimeUs(), 354.0) == Approx(139.0));
}

TEST_CASE("without polarization the optical cycle keeps the lattice state") {
  const PumpModel m = model(0.0);
  CHECK(distance(m.pumpSteadyState(), m.thermal) == 0.0);
  CHECK(distance(m.illuminatedFixedPoint(), m.thermal) < 1e-15);
}

TEST_CASE("invalid pump parameters are rejected") {
  CHECK_THROWS_AS(model(0.3), std::invalid_argument);
  CHECK_THROWS_AS(model(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(makePumpModel(SpinSystem{}, FieldOrientation{3297, 0}, 0.05, 0.0, 354.0), std::invalid_argument);
  CHECK_THROWS_AS(parsePumpPolarity("sideways"), std::invalid_argument);
}

TEST_CASE("thermal populations follow the high-temperature Boltzmann law") {
  const PopulationState th = thermalPopulations(SpinSystem{}, FieldOrientation{3297.0, 0.0}, 300.0);
  CHECK(sum(th) == Approx(1.0).epsilon(1e-14));
  // the lowest level (m = -3/2) carries the largest population
  CHECK(th.level(0) > th.level(1));
  CHECK(th.level(1) > th.level(2));
  const double kT = kBoltzmannMHzPerKelvin * 300.0;
  const double e0 = larmorMHz(2.0028, 3297.0) * -1.5 + 35.0 * (2.25 - 1.25);
  CHECK(th.level(0) == Approx((1 - e0 / kT) / 4.0).epsilon(1e-12));
}

TEST_CASE("evolution: identity, fixed points, semigroup") {
  const PumpModel m = model();
  const PopulationState start = m.thermal;
  const PopulationState same = evolvePopulations(start, m, true, 0.0);
  CHECK(distance(same, start) == 0.0);
  CHECK(distance(evolvePopulations(m.illuminatedFixedPoint(), m, false, 1e6), m.thermal) < 1e-12);
  CHECK(distance(evolvePopulations(m.thermal, m, true, 1e6), m.illuminatedFixedPoint()) < 1e-12);
  for (bool light : {true, false}) {
    const PopulationState a = evolvePopulations(evolvePopulations(start, m, light, 37.0), m, light, 91.0);
    const PopulationState b = evolvePopulations(start, m, light, 128.0);
    CHECK(distance(a, b) < 1e-15);
  }
  CHECK_THROWS_AS(evolvePopulations(start, m, true, -1.0), std::invalid_argument);
}

TEST_CASE("illuminated fixed point combines optical and lattice rates") {
  const PumpModel m = model(0.1);
  const PopulationState fp = m.illuminatedFixedPoint();
  const PopulationState opt = m.pumpSteadyState();
  const double teff = m.effectivePumpTimeUs();
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(fp.p[i] == Approx(teff * (opt.p[i] / 139.0 + m.thermal.p[i] / 354.0)).epsilon(1e-14));
  }
}

TEST_CASE("property: conservation, positivity and monotone approach") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> eps(0.0, 0.25), dt(0.0, 400.0);
  std::bernoulli_distribution light(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const PumpModel m = model(eps(rng), trial % 2 ? PumpPolarity::IntoHalf : PumpPolarity::IntoThreeHalves);
    PopulationState s = m.thermal;
    for (int step = 0; step < 20; ++step) {
      const bool on = light(rng);
      const PopulationState target = on ? m.illuminatedFixedPoint() : m.thermal;
      const double before = distance(s, target);
      s = evolvePopulations(s, m, on, dt(rng));
      CHECK(std::abs(sum(s) - 1.0) < 1e-12);
      for (double v : s.p) CHECK(v >= 0.0);
      CHECK(distance(s, target) <= before + 1e-15);
    }
  }
}

TEST_CASE("recovery trace: baseline, flat trace at epsilon 0, sweep-start check") {
  RecoveryTiming timing;
  const auto before = std::vector<double>{0.0, 50.0, 100.0, 199.0};
  const Spectrum base = echoDetectedRecoveryTrace(model(), timing, before);
  const double thermal = populationDifference(model().thermal, timing.probed);
  for (double v : base.intensity) CHECK(v == Approx(thermal).epsilon(1e-14));

  std::vector<double> grid;
  for (int i = 0; i <= 250; ++i) grid.push_back(10.0 * i);
  const Spectrum flat = echoDetectedRecoveryTrace(model(0.0), timing, grid);
  for (double v : flat.intensity) CHECK(v == Approx(thermal).epsilon(1e-14));

  timing.sweepStartUs = 100.0;
  CHECK_THROWS_AS(echoDetectedRecoveryTrace(model(), timing, {50.0, 150.0}), std::invalid_argument);
}

TEST_CASE("during-light rise is monoexponential with Top_eff") {
  const PumpModel m = model();
  std::vector<double> t, y;
  for (int i = 0; i < 100; ++i) {
    t.push_back(10.0 * i);
    y.push_back(populationDifference(evolvePopulations(m.thermal, m, true, t.back()), {2, 3}));
  }
  const FitResult f = fitMonoExponential(t, y);
  REQUIRE(f.converged);
  CHECK(f.params.timeConstantUs == Approx(m.effectivePumpTimeUs()).epsilon(0.01));
}

TEST_CASE("piecewise refit of a recovery trace returns Top and T1") {
  const PumpModel m = model();
  RecoveryTiming timing;
  std::vector<double> grid;
  for (int i = 0; i <= 250; ++i) grid.push_back(10.0 * i);
  const Spectrum trace = echoDetectedRecoveryTrace(m, timing, grid);
  const PiecewiseFit fit = fitPiecewiseRecovery(trace, 1200.0, 200.0);
  REQUIRE(fit.duringLight.converged);
  REQUIRE(fit.afterLight.converged);
  const RecoveryTimes times = recoveryTimes(fit);
  CHECK(times.t1Us == Approx(354.0).epsilon(0.02));
  CHECK(times.effectivePumpUs == Approx(m.effectivePumpTimeUs()).epsilon(0.02));
  CHECK(times.bareOpticalUs == Approx(139.0).epsilon(0.02));
}
