#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "finls/error.hpp"
#include "finls/ground_state.hpp"
#include "finls/spectral.hpp"
#include "oracles.hpp"

namespace finls::spectral {
namespace {

Field shifted_gaussian(const Grid& g, double width, double x0, double kick) {
  return sample(g, [&](const std::array<double, 3>& x) {
    const double r2 = (x[0] - x0) * (x[0] - x0) + x[1] * x[1] + x[2] * x[2];
    return std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, kick * x[1]);
  });
}

TEST(Spectral, ParsevalHoldsForTheDiscreteProduct) {
  const Grid g(2, 64, 6.0);
  const Field u = shifted_gaussian(g, 0.9, 0.7, 1.3);
  const Field uh = to_frequency(u);
  EXPECT_NEAR(l2_norm_squared(uh), l2_norm_squared(u), 1e-12 * l2_norm_squared(u));
  const Field back = to_physical(uh);
  for (std::size_t n = 0; n < g.size(); ++n) EXPECT_NEAR(std::abs(back[n] - u[n]), 0.0, 1e-13);
}

TEST(Spectral, GaussianSobolevNormsMatchTheRadialIntegral) {
  // Integer orders have smooth symbols and converge spectrally; fractional
  // orders are limited by the kink of |xi|^{2 sigma} at the zero mode.
  for (int dim : {2, 3}) {
    const Grid g(dim, dim == 2 ? 256 : 64, dim == 2 ? 30.0 : 20.0);
    const Field u = ground::gaussian(g, 1.1, 0.8);
    for (double sigma : {0.0, 0.45, 0.8, 1.0}) {
      const double expected = testing::gaussian_sobolev_squared(dim, 1.1, 0.8, sigma);
      const double got = sobolev_seminorm(u, sigma);
      const double tol = sigma == std::floor(sigma) ? 1e-10 : 5e-4;
      EXPECT_NEAR(got * got / expected, 1.0, tol) << "dim " << dim << " sigma " << sigma;
    }
  }
}

TEST(Spectral, FracLaplacianKillsConstants) {
  const Grid g(2, 32, 3.0);
  const Field one = sample(g, [](const std::array<double, 3>&) { return cplx(1.0, 0.0); });
  EXPECT_LT(l2_norm(frac_laplacian(one, 0.8)), 1e-13);
}

TEST(Spectral, FreePropagatorIsUnitaryAndAGroup) {
  const Grid g(2, 64, 8.0);
  const Field u = shifted_gaussian(g, 1.0, -0.5, 0.7);
  const double s = 0.8;
  const Field a = free_propagator(free_propagator(u, 0.3, s), 0.45, s);
  const Field b = free_propagator(u, 0.75, s);
  EXPECT_NEAR(l2_norm(a), l2_norm(u), 1e-12);
  EXPECT_LT(l2_norm(a - b), 1e-12);
  EXPECT_LT(l2_norm(free_propagator(b, -0.75, s) - u), 1e-12);
}

TEST(Spectral, FreePropagatorActsOnASingleModeByItsPhase) {
  const Grid g(2, 32, std::numbers::pi);
  const double s = 0.7;
  const Field mode = sample(g, [](const std::array<double, 3>& x) { return std::polar(1.0, 3.0 * x[0] + 2.0 * x[1]); });
  const Field out = free_propagator(mode, 0.4, s);
  const cplx phase = std::polar(1.0, -0.4 * std::pow(13.0, s));
  for (std::size_t n = 0; n < g.size(); n += 17) EXPECT_NEAR(std::abs(out[n] - phase * mode[n]), 0.0, 1e-12);
}

TEST(Spectral, ResolventInvertsTheShiftedLaplacian) {
  const Grid g(2, 64, 6.0);
  const Field u = shifted_gaussian(g, 0.8, 0.3, 0.0);
  const double m = 2.5, s = 0.6;
  const Field r = resolvent(u, m, s);
  const Field back = apply_radial_multiplier(r, [&](double k) { return (m + k * k) / resolvent_constant(s); });
  EXPECT_LT(l2_norm(back - u), 1e-12);
  EXPECT_NEAR(resolvent_constant(s), std::sqrt(std::sin(std::numbers::pi * s) / std::numbers::pi), 1e-15);
}

TEST(Spectral, GradientMatchesTheAnalyticDerivative) {
  const Grid g(2, 64, 8.0);
  const double w = 0.9;
  const Field u = ground::gaussian(g, w);
  const auto grad = gradient(u);
  ASSERT_EQ(grad.size(), 2u);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto x = g.position(n);
    const double expect = -x[1] / (w * w) * u[n].real();
    EXPECT_NEAR(grad[1][n].real(), expect, 1e-10);
  }
}

TEST(Spectral, DealiasKeepsOnlyTheCentralTwoThirds) {
  const Grid g(2, 32, 1.0);
  Field f(g, Representation::frequency);
  for (auto& v : f.values()) v = 1.0;
  dealias_two_thirds(f);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto idx = g.unravel(n);
    const bool kept = std::abs(g.mode_number(idx[0])) <= 32 / 3 && std::abs(g.mode_number(idx[1])) <= 32 / 3;
    EXPECT_EQ(f[n], kept ? cplx(1.0) : cplx(0.0));
  }
  Field phys(g);
  EXPECT_THROW(dealias_two_thirds(phys), ContractViolation);
}

TEST(Spectral, LebesgueNorms) {
  const Grid g(2, 32, 2.0);
  const Field c = sample(g, [](const std::array<double, 3>&) { return cplx(0.0, 2.0); });
  EXPECT_NEAR(lp_norm(c, 2.0), 2.0 * 4.0, 1e-12);
  EXPECT_NEAR(lp_norm(c, 4.0), 2.0 * std::pow(16.0, 0.25), 1e-12);
  EXPECT_DOUBLE_EQ(sup_norm(c), 2.0);
  EXPECT_DOUBLE_EQ(lp_norm(c, INFINITY), 2.0);
  EXPECT_NEAR(sobolev_norm(c, 1.0), 8.0, 1e-12);
}

}  // namespace
}  // namespace finls::spectral
