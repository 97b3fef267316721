#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "finls/dynamics.hpp"
#include "finls/error.hpp"
#include "finls/ground_state.hpp"
#include "finls/spectral.hpp"

namespace finls::dynamics {
namespace {

using spectral::cplx;

const ModelParams kParams{2, 0.8, 0.4, 3.0, model::Sign::focusing};

RecordSpec small_spec() {
  RecordSpec rs;
  rs.radii = {1.0, 2.0};
  rs.virial_radius = 1.5;
  return rs;
}

Field kicked_gaussian(const Grid& g, double width, double amp, double kick) {
  return spectral::sample(g, [&](const std::array<double, 3>& x) {
    return amp * std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2 * width * width)) * std::polar(1.0, kick * x[0]);
  });
}

TEST(StrangStep, ConservesMassToRoundoff) {
  const Grid g(2, 64, 8.0);
  const model::WeightField w(g, kParams.b);
  Field u = kicked_gaussian(g, 1.0, 1.2, 0.5);
  const double m0 = model::mass(u);
  for (int i = 0; i < 20; ++i) {
    u = strang_step(u, 1e-2, kParams, w);
    EXPECT_NEAR(model::mass(u) / m0, 1.0, 1e-13);
  }
}

TEST(StrangStep, IsTimeReversible) {
  // Conjugation reverses time, so conj S(dt) conj S(dt) is the identity for a
  // symmetric splitting.
  const Grid g(2, 64, 8.0);
  const model::WeightField w(g, kParams.b);
  const Field u = kicked_gaussian(g, 1.0, 1.0, 0.8);
  const Field back = spectral::conj(strang_step(spectral::conj(strang_step(u, 5e-3, kParams, w)), 5e-3, kParams, w));
  EXPECT_LT(spectral::l2_norm(back - u), 1e-12);
  EXPECT_THROW(strang_step(u, -1e-3, kParams, w), DomainError);
}

TEST(StrangStep, ReducesToTheFreeFlowForSmallData) {
  const Grid g(2, 64, 8.0);
  const model::WeightField w(g, kParams.b);
  const Field u = kicked_gaussian(g, 1.0, 1e-6, 0.3);
  const Field a = strang_step(u, 0.1, kParams, w);
  const Field b = spectral::free_propagator(u, 0.1, kParams.s);
  EXPECT_LT(spectral::l2_norm(a - b), 1e-12 * spectral::l2_norm(u));
  const Field zero(g);
  EXPECT_EQ(spectral::l2_norm(strang_step(zero, 0.1, kParams, w)), 0.0);
}

TEST(StrangStep, IsSecondOrder) {
  const Grid g(2, 64, 8.0);
  const model::WeightField w(g, kParams.b);
  const Field u0 = kicked_gaussian(g, 1.0, 1.0, 0.4);
  auto run = [&](int n) {
    Field u = u0;
    for (int i = 0; i < n; ++i) u = strang_step(u, 0.2 / n, kParams, w);
    return u;
  };
  const Field ref = run(640);
  const double e1 = spectral::l2_norm(run(20) - ref);
  const double e2 = spectral::l2_norm(run(40) - ref);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.15);
}

TEST(NonlinearPhase, RotatesByTheLocalIntensity) {
  const Grid g(2, 32, 4.0);
  const model::WeightField w(g, kParams.b);
  Field u = kicked_gaussian(g, 1.0, 1.5, 0.0);
  const Field u0 = u;
  nonlinear_phase(u, 0.1, kParams, w);
  for (std::size_t n = 0; n < g.size(); n += 7) {
    const double a = std::abs(u0[n]);
    EXPECT_NEAR(std::abs(u[n] - u0[n] * std::polar(1.0, 0.1 * w[n] * a * a)), 0.0, 1e-14);
  }
}

TEST(AdaptDt, FollowsTheAmplitudeRule) {
  EvolveControls c;
  c.dt = 0.01;
  const double wmax = 2.0;
  EXPECT_NEAR(adapt_dt(0.0, kParams, c, wmax), 0.01, 1e-16);
  EXPECT_NEAR(adapt_dt(3.0, kParams, c, wmax), 0.01 / 19.0, 1e-16);
  EXPECT_DOUBLE_EQ(adapt_dt(1e6, kParams, c, wmax), c.effective_dt_floor());
  EXPECT_DOUBLE_EQ(c.effective_dt_floor(), 0.01 / 1024.0);
  const Grid g(2, 32, 4.0);
  const Field u = kicked_gaussian(g, 1.0, 2.0, 0.0);
  EXPECT_NEAR(adapt_dt(u, kParams, c), 0.01 / (1.0 + 4.0 * std::pow(g.spacing(), -0.4)), 1e-15);
}

TEST(EvolveControls, RejectsInconsistentSettings) {
  auto bad = [](auto mutate) {
    EvolveControls c;
    mutate(c);
    return c;
  };
  EXPECT_NO_THROW(EvolveControls{}.validate());
  EXPECT_THROW(bad([](EvolveControls& c) { c.dt = 0.0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](EvolveControls& c) { c.t_end = -1.0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](EvolveControls& c) { c.snapshot_stride = 0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](EvolveControls& c) { c.dt_floor = 1.0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](EvolveControls& c) { c.gradient_cap = 1.0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](EvolveControls& c) { c.boundary_band = 1.0; }).validate(), ValidationError);
  EXPECT_THROW(bad([](EvolveControls& c) { c.snapshot_times = {2.0}; }).validate(), ValidationError);
}

TEST(Evolve, CompletesAndConservesOnASmallRun) {
  const Grid g(2, 64, 8.0);
  EvolveControls c;
  c.dt = 5e-3;
  c.t_end = 0.5;
  c.snapshot_stride = 10;
  c.stop_on_boundary = false;  // the algebraic tails of the fractional flow reach the edge
  std::vector<double> seen;
  const auto r = evolve(kicked_gaussian(g, 1.0, 0.8, 0.3), kParams, c, small_spec(),
                        [&](const DiagnosticsRecord& rec) { seen.push_back(rec.t); });
  EXPECT_EQ(r.outcome, Outcome::completed);
  EXPECT_NEAR(r.final_time, 0.5, 1e-12);
  EXPECT_LT(r.max_mass_drift, 1e-12);
  EXPECT_LT(r.max_energy_drift, 1e-4);
  EXPECT_FALSE(r.mass_drift_flag);
  ASSERT_EQ(seen.size(), r.records.size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], r.records[i].t);
  EXPECT_EQ(r.records.front().t, 0.0);
  EXPECT_EQ(r.snapshots.size(), 6u);
  EXPECT_TRUE(r.scattering_profile.has_value());
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    EXPECT_GT(r.records[i].t, r.records[i - 1].t);
    EXPECT_LE(r.records[i].dt, c.dt);
  }
}

TEST(Evolve, IsDeterministic) {
  const Grid g(2, 32, 6.0);
  EvolveControls c;
  c.dt = 1e-2;
  c.t_end = 0.3;
  const Field u0 = kicked_gaussian(g, 1.0, 1.0, 0.2);
  const auto a = evolve(u0, kParams, c, small_spec());
  const auto b = evolve(u0, kParams, c, small_spec());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t n = 0; n < g.size(); ++n) EXPECT_EQ(a.final_state[n], b.final_state[n]);
}

TEST(Evolve, ZeroDataStaysZero) {
  const Grid g(2, 32, 6.0);
  EvolveControls c;
  c.t_end = 0.05;
  const auto r = evolve(Field(g), kParams, c, small_spec());
  EXPECT_EQ(r.outcome, Outcome::completed);
  EXPECT_EQ(spectral::l2_norm(r.final_state), 0.0);
}

TEST(Evolve, NonFiniteDataRaises) {
  const Grid g(2, 32, 6.0);
  Field u = kicked_gaussian(g, 1.0, 1.0, 0.0);
  u[5] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
  EXPECT_THROW(evolve(u, kParams, EvolveControls{}, small_spec()), NumericalFailure);
}

TEST(Evolve, BoundaryPolicy) {
  const Grid g(2, 32, 4.0);
  const Field wide = kicked_gaussian(g, 2.0, 1.0, 0.0);
  EvolveControls c;
  c.dt = 1e-2;
  c.t_end = 0.1;
  const auto stop = evolve(wide, kParams, c, small_spec());
  EXPECT_EQ(stop.outcome, Outcome::boundary_contaminated);
  EXPECT_TRUE(stop.boundary_flag);
  EXPECT_EQ(stop.records.size(), 1u);
  c.stop_on_boundary = false;
  const auto warn = evolve(wide, kParams, c, small_spec());
  EXPECT_EQ(warn.outcome, Outcome::completed);
  EXPECT_TRUE(warn.boundary_flag);
  EXPECT_GT(warn.max_boundary_tail, c.boundary_threshold);
}

TEST(ScatteringMonitor, LinearRunHasAZeroTail) {
  const Grid g(2, 64, 16.0);
  EvolveControls c;
  c.dt = 1e-2;
  c.t_end = 0.6;
  const auto r = evolve(kicked_gaussian(g, 1.0, 1e-7, 0.0), kParams, c, small_spec());
  const auto rep = scattering_monitor(r, kParams);
  EXPECT_TRUE(rep.applicable);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.cauchy_tail, 1e-12 * spectral::sobolev_norm(r.final_state, kParams.s) + 1e-25);
  EXPECT_EQ(rep.times.size(), 6u);
  TrajectoryResult blown = r;
  blown.outcome = Outcome::blow_up_detected;
  EXPECT_FALSE(scattering_monitor(blown, kParams).applicable);
  TrajectoryResult few = r;
  few.snapshots.erase(few.snapshots.begin() + 2, few.snapshots.end());
  EXPECT_THROW(scattering_monitor(few, kParams), InsufficientData);
}

TEST(DispersiveDecay, MassIsFlatAndLongWindowsAreRejected) {
  const Grid g(2, 256, 64.0);
  const Field phi = ground::gaussian(g, 1.0);
  const auto rep = dispersive_decay_check(phi, kParams, {1.0, 2.0, 3.0, 4.0}, {2.0, 4.0, INFINITY}, 1e-4);
  ASSERT_EQ(rep.fits.size(), 3u);
  EXPECT_NEAR(rep.fits[0].slope, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(rep.fits[1].predicted, -0.5);
  EXPECT_DOUBLE_EQ(rep.fits[2].predicted, -1.0);
  EXPECT_LT(rep.fits[2].slope, 0.0);
  const Grid small(2, 64, 6.0);
  EXPECT_THROW(dispersive_decay_check(ground::gaussian(small, 1.0), kParams, {1.0, 10.0}, {2.0}, 1e-4), WindowTooLong);
  EXPECT_THROW(dispersive_decay_check(phi, kParams, {1.0}, {2.0}), InsufficientData);
}

}  // namespace
}  // namespace finls::dynamics
