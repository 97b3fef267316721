#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "finls/error.hpp"
#include "finls/ground_state.hpp"
#include "finls/model.hpp"
#include "oracles.hpp"

namespace finls::model {
namespace {

ModelParams base() { return {2, 0.8, 0.4, 3.0, Sign::focusing}; }

TEST(Model, ValidationNamesTheViolatedBound) {
  EXPECT_NO_THROW(validate(base()));
  auto bad = [](auto mutate) {
    ModelParams p = base();
    mutate(p);
    return p;
  };
  EXPECT_THROW(validate(bad([](ModelParams& p) { p.dim = 1; })), ValidationError);
  EXPECT_THROW(validate(bad([](ModelParams& p) { p.s = 0.6; })), ValidationError);  // below N/(2N-1)
  EXPECT_THROW(validate(bad([](ModelParams& p) { p.s = 1.0; })), ValidationError);
  EXPECT_THROW(validate(bad([](ModelParams& p) { p.b = 0.0; })), ValidationError);
  EXPECT_THROW(validate(bad([](ModelParams& p) { p.b = 1.6; })), ValidationError);
  EXPECT_THROW(validate(bad([](ModelParams& p) { p.p = 2.2; })), ValidationError);  // mass-critical
  EXPECT_THROW(validate(bad([](ModelParams& p) { p.p = 7.5; })), ValidationError);  // above energy-critical
  try {
    validate(bad([](ModelParams& p) { p.b = 1.7; }));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("b="), std::string::npos);
  }
}

TEST(Model, DerivedExponentsForTheReferenceCase) {
  const auto e = derive_exponents(base());
  EXPECT_NEAR(e.B, 3.0, 1e-14);
  EXPECT_NEAR(e.A, 1.0, 1e-14);
  EXPECT_NEAR(e.s_c, 0.4, 1e-14);
  EXPECT_NEAR(e.gamma_c, 1.0, 1e-14);
  EXPECT_NEAR(e.p_star, 2.2, 1e-14);
  EXPECT_NEAR(e.p_upper, 7.0, 1e-14);
  const auto e3 = derive_exponents({3, 0.9, 0.5, 2.5, Sign::focusing});
  EXPECT_NEAR(e3.s_c, 1.5 - 1.3 / 1.5, 1e-14);
  EXPECT_NEAR(e3.B + e3.A, 3.5, 1e-14);
}

TEST(Model, ScatteringHypotheses) {
  EXPECT_FALSE(scattering_hypotheses_hold(base()));
  EXPECT_TRUE(scattering_hypotheses_hold({3, 0.9, 0.2, 2.1, Sign::focusing}));
  EXPECT_FALSE(scattering_hypotheses_hold({3, 0.9, 0.5, 2.5, Sign::focusing}));
}

// Average of |x|^{-b} over [-a, a]^2 in polar coordinates over one of the
// eight triangles of the square.
double square_average_oracle(double a, double b) {
  const double wedge = testing::integrate_interval(
      [&](double th) { return std::pow(a / std::cos(th), 2.0 - b) / (2.0 - b); }, 0.0, std::numbers::pi / 4.0);
  return 8.0 * wedge / (4.0 * a * a);
}

TEST(Model, CubeAverageOfTheWeight) {
  for (double b : {0.1, 0.4, 1.2}) {
    for (double a : {0.05, 0.5, 2.0}) {
      EXPECT_NEAR(cube_average_of_weight(2, a, b) / square_average_oracle(a, b), 1.0, 1e-10) << a << " " << b;
    }
  }
  // 3-d: average of |x|^{-b} over a ball is 3/(3-b) a^{-b}; the cube average
  // must sit between the inscribed and circumscribed ball values.
  const double c = cube_average_of_weight(3, 1.0, 0.5);
  EXPECT_GT(c, std::pow(std::sqrt(3.0), -0.5));
  EXPECT_LT(c, 3.0 / 2.5);
  EXPECT_NEAR(cube_average_of_weight(3, 1.0, 0.0), 1.0, 1e-10);
}

TEST(Model, WeightFieldUsesTheCellAverageAtTheOrigin) {
  const Grid g(2, 32, 4.0);
  const WeightField w(g, 0.4);
  EXPECT_NEAR(w[g.origin_flat_index()], cube_average_of_weight(2, g.spacing() / 2.0, 0.4), 1e-15);
  EXPECT_NEAR(w.max_off_origin(), std::pow(g.spacing(), -0.4), 1e-15);
  const auto idx = g.ravel({g.origin_index() + 3, g.origin_index(), 0});
  EXPECT_NEAR(w[idx], std::pow(3.0 * g.spacing(), -0.4), 1e-14);
  EXPECT_THROW(WeightField(g, 2.0), DomainError);
}

TEST(Model, PotentialOfAGaussianMatchesTheRadialIntegral) {
  // The cusp of |x|^{-b} limits the lattice sum to order h^{N-b}.
  const double expected = testing::gaussian_weighted_power(2, 1.2, 0.9, 0.4, 4.0);
  auto error = [&](int points) {
    const Grid g(2, points, 10.0);
    return std::abs(potential(ground::gaussian(g, 1.2, 0.9), WeightField(g, 0.4), 3.0) / expected - 1.0);
  };
  const double coarse = error(128), fine = error(256);
  EXPECT_LT(fine, 1e-3);
  EXPECT_NEAR(std::log2(coarse / fine), 1.6, 0.15);
}

TEST(Model, FunctionalsAreConsistent) {
  const Grid g(2, 128, 10.0);
  const ModelParams p = base();
  const WeightField w(g, p.b);
  const Field u = ground::gaussian(g, 1.0, 1.5);
  const auto f = evaluate(u, p, w);
  EXPECT_NEAR(f.mass, mass(u), 1e-12 * f.mass);
  EXPECT_NEAR(f.kinetic, kinetic(u, p.s), 1e-12 * f.kinetic);
  EXPECT_NEAR(f.potential, potential(u, w, p.p), 1e-12 * f.potential);
  EXPECT_NEAR(f.energy, f.kinetic - 0.5 * f.potential, 1e-12 * std::abs(f.kinetic));
  EXPECT_NEAR(f.virial, f.kinetic - 0.75 * f.potential, 1e-12 * std::abs(f.kinetic));
  ModelParams d = p;
  d.sign = Sign::defocusing;
  EXPECT_NEAR(energy(u, d, w), f.kinetic + 0.5 * f.potential, 1e-12 * f.kinetic);
  EXPECT_NEAR(f.mass, testing::gaussian_sobolev_squared(2, 1.0, 1.5, 0.0), 1e-10 * f.mass);
}

TEST(Model, MeMgNormalisation) {
  const Functionals f{2.0, 3.0, 4.0, 1.0, 0.0};
  const ThresholdReference ref{2.0, 3.0, 4.0, 1.0};
  const auto e = derive_exponents(base());
  const auto one = me_mg(f, ref, e);
  EXPECT_DOUBLE_EQ(one.me, 1.0);
  EXPECT_DOUBLE_EQ(one.mg, 1.0);
  const Functionals g{8.0, 12.0, 4.0, 0.5, 0.0};
  const auto v = me_mg(g, ref, e);
  EXPECT_NEAR(v.me, 4.0 * 0.5, 1e-14);         // (M/MQ)^gamma_c E/EQ
  EXPECT_NEAR(v.mg, 2.0 * 2.0, 1e-14);         // (||u||/||Q||)^gamma_c ||D^s u||/||D^s Q||
  EXPECT_EQ(to_string(Regime::blowup), "blowup_regime");
  EXPECT_EQ(sign_from_string("defocusing"), Sign::defocusing);
  EXPECT_THROW(sign_from_string("sideways"), Error);
}

}  // namespace
}  // namespace finls::model
