#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "finls/cutoff.hpp"
#include "finls/diagnostics.hpp"
#include "finls/error.hpp"
#include "finls/quadrature.hpp"
#include "oracles.hpp"

namespace finls::diagnostics {
namespace {

using spectral::cplx;

TEST(MQuadrature, SingleModeMatchesTheBetaIntegral) {
  // For a plane wave of frequency k, int_0^inf m^s c_s^2 k^2 / (m + k^2)^2 dm
  // = c_s^2 Gamma(1 + s) Gamma(1 - s) k^{2s}.
  const Grid g(2, 64, std::numbers::pi);
  for (double s : {0.55, 0.8, 0.95}) {
    const auto q = make_m_quadrature(g, s);
    for (auto [a, b] : {std::pair{1, 0}, {3, 2}, {8, 5}, {20, 7}}) {
      const Field mode = spectral::sample(g, [&](const std::array<double, 3>& x) {
        return std::polar(1.0, a * x[0] + b * x[1]);
      });
      const double k2 = a * a + b * b;
      const double cs2 = std::sin(std::numbers::pi * s) / std::numbers::pi;
      const double expected = cs2 * std::tgamma(1.0 + s) * std::tgamma(1.0 - s) * std::pow(k2, s) * model::mass(mode);
      const auto r = balakrishnan_identity(mode, s, q);
      EXPECT_NEAR(r.lhs / expected, 1.0, 1e-12);
      EXPECT_NEAR(r.rhs / expected, 1.0, 1e-6) << "s " << s << " mode " << a << "," << b;
    }
  }
}

TEST(MQuadrature, WindowCoversTheGridSpectrum) {
  const Grid g(2, 128, 8.0);
  const auto q = make_m_quadrature(g, 0.8);
  EXPECT_LT(q.m_lo(), std::pow(g.min_frequency(), 2));
  EXPECT_GT(q.m_hi(), std::pow(g.max_frequency(), 2));
  EXPECT_GT(upper_offset(0.8, 1e-8), upper_offset(0.8, 1e-4));
  EXPECT_GT(lower_offset(0.8, 1e-8), lower_offset(0.8, 1e-4));
  EXPECT_THROW(make_m_quadrature(g, 1.0), DomainError);
  MQuadratureSpec bad;
  bad.nodes = 1;
  EXPECT_THROW(make_m_quadrature(g, 0.5, bad), DomainError);
  const Field u(g);
  EXPECT_THROW(balakrishnan_identity(u, 0.7, q), ContractViolation);
}

TEST(Cutoff, SmoothStepLimits) {
  EXPECT_DOUBLE_EQ(smooth_step(-0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(smooth_step(0.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(smooth_step(1.0, 0.5), 1.0);
  EXPECT_NEAR(smooth_step(0.5, 0.5), 0.5, 1e-15);
  double prev = 0.0;
  for (double t = 0.01; t < 1.0; t += 0.01) {
    const double v = smooth_step(t, 0.4);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Cutoff, PsiTemplate) {
  EXPECT_DOUBLE_EQ(psi_template(0.0), 1.0);
  EXPECT_DOUBLE_EQ(psi_template(0.5), 1.0);
  EXPECT_DOUBLE_EQ(psi_template(1.0), 0.0);
  EXPECT_DOUBLE_EQ(psi_template(3.0), 0.0);
  EXPECT_NEAR(psi_template(0.75), 0.5, 1e-15);
}

TEST(Cutoff, VirialTemplateDerivativesMatchFiniteDifferences) {
  const double h = 2e-5;
  for (double r = 0.05; r < 2.5; r += 0.0731) {
    const auto c = virial_template(r);
    const auto p = virial_template(r + h);
    const auto m = virial_template(r - h);
    EXPECT_NEAR(c.d1, (p.f - m.f) / (2 * h), 1e-6 * (1 + std::abs(c.d1))) << r;
    EXPECT_NEAR(c.d2, (p.d1 - m.d1) / (2 * h), 1e-6 * (1 + std::abs(c.d2))) << r;
    EXPECT_NEAR(c.d3, (p.d2 - m.d2) / (2 * h), 1e-6 * (1 + std::abs(c.d3))) << r;
    EXPECT_NEAR(c.d4, (p.d3 - m.d3) / (2 * h), 1e-6 * (1 + std::abs(c.d4))) << r;
  }
}

TEST(Cutoff, VirialTemplateShape) {
  for (double r : {0.0, 0.3, 0.99}) {
    const auto v = virial_template(r);
    EXPECT_NEAR(v.f, r * r / 2, 1e-15);
    EXPECT_NEAR(v.d2, 1.0, 1e-15);
  }
  EXPECT_NEAR(virial_template(2.0).f, 1.0, 1e-12);
  EXPECT_NEAR(virial_template(5.0).f, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(virial_template(5.0).d1, 0.0);
  // f(2) - f(1) = int_1^2 r (1 - step(r - 1, a)) dr must equal 1/2.
  const double a = virial_template_center();
  const double rise = testing::integrate_interval([&](double r) { return r * (1.0 - smooth_step(r - 1.0, a)); }, 1.0, 2.0);
  EXPECT_NEAR(rise, 0.5, 1e-10);
}

TEST(Cutoff, ScaledCutoffValues) {
  const double R = 3.0;
  for (int dim : {2, 3}) {
    for (double r : {0.5, 2.9, 4.0, 5.5, 7.0}) {
      const auto v = virial_cutoff(r, R, dim);
      const auto t = virial_template(r / R);
      EXPECT_NEAR(v.f, R * R * t.f, 1e-12);
      EXPECT_NEAR(v.radial, R * t.d1, 1e-12);
      EXPECT_NEAR(v.second, t.d2, 1e-12);
      EXPECT_NEAR(v.tangential, R * t.d1 / r, 1e-12);
      EXPECT_NEAR(v.laplacian, t.d2 + (dim - 1) * R * t.d1 / r, 1e-12);
    }
    EXPECT_NEAR(virial_cutoff(1.0, R, dim).laplacian, dim, 1e-12);
    EXPECT_NEAR(virial_cutoff(1.0, R, dim).bilaplacian, 0.0, 1e-12);
    EXPECT_NEAR(virial_cutoff(7.0, R, dim).bilaplacian, 0.0, 1e-12);
  }
}

TEST(Cutoff, BilaplacianMatchesFiniteDifferencesOfTheLaplacian) {
  // Radial Laplacian g'' + (N-1)/r g' of g = Delta f_R.
  const double R = 2.0, h = 1e-4;
  for (int dim : {2, 3}) {
    for (double r = 2.1; r < 3.9; r += 0.17) {
      auto lap = [&](double x) { return virial_cutoff(x, R, dim).laplacian; };
      const double d2 = (lap(r + h) - 2 * lap(r) + lap(r - h)) / (h * h);
      const double d1 = (lap(r + h) - lap(r - h)) / (2 * h);
      EXPECT_NEAR(virial_cutoff(r, R, dim).bilaplacian, d2 + (dim - 1) / r * d1, 1e-4) << r;
    }
  }
}

TEST(Cutoff, PointwisePropertiesOnTheGrid) {
  const Grid g(2, 128, 8.0);
  for (const auto& c : check_cutoff(g, {2.0, CutoffKind::psi})) EXPECT_TRUE(c.pass) << c.name << " " << c.worst;
  for (const auto& c : check_cutoff(g, {2.0, CutoffKind::f_virial})) {
    // f_R' rises then falls back to zero, so f_R'' >= 0 cannot hold on all of R^N.
    if (c.name == "f_R'' >= 0") {
      EXPECT_FALSE(c.pass);
      continue;
    }
    EXPECT_TRUE(c.pass) << c.name << " " << c.worst;
  }
  const Field psi = psi_field(g, 2.0);
  EXPECT_DOUBLE_EQ(psi[g.origin_flat_index()].real(), 1.0);
}

}  // namespace
}  // namespace finls::diagnostics
