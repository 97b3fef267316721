#include "finls/cutoff.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <memory>

#include "finls/error.hpp"

namespace finls::diagnostics {

namespace ad = boost::math::differentiation;

namespace {

constexpr double kKappa = 1.0;
// Beyond this the tanh argument saturates to machine precision.
constexpr double kSaturation = 40.0;

double value_of(double t) { return t; }
template <typename T>
double value_of(const T& t) {
  return t.derivative(0);
}

template <typename T>
T smooth_step_t(const T& t, double center, double kappa) {
  using std::tanh;
  const double t0 = value_of(t);
  if (t0 <= 0.0) return T(0.0) * t;
  if (t0 >= 1.0) return T(0.0) * t + 1.0;
  const double arg0 = kappa * (t0 - center) / (t0 * (1.0 - t0));
  if (arg0 > kSaturation) return T(0.0) * t + 1.0;
  if (arg0 < -kSaturation) return T(0.0) * t;
  const T arg = kappa * (t - center) / (t * (1.0 - t));
  return 0.5 * (1.0 + tanh(arg));
}

class GlRule {
 public:
  explicit GlRule(std::size_t n) : table_(gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free), n_(n) {}
  template <typename F>
  double integrate(F&& fn, double a, double b) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double x = 0.0;
      double w = 0.0;
      gsl_integration_glfixed_point(a, b, i, &x, &w, table_.get());
      acc += w * fn(x);
    }
    return acc;
  }

 private:
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table_;
  std::size_t n_;
};

const GlRule& gl_rule() {
  static const GlRule rule(96);
  return rule;
}

double solve_center() {
  // int_0^1 (1 + t) S_a(t) dt = 1 makes f' integrate to 1/2 over [1, 2].
  auto excess = [](double a) {
    return gl_rule().integrate([a](double t) { return (1.0 + t) * smooth_step(t, a, kKappa); }, 0.0, 1.0) - 1.0;
  };
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      excess, 0.05, 0.95, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (bracket.first + bracket.second);
}

double template_d1(double r) {
  if (r <= 1.0) return r;
  if (r >= 2.0) return 0.0;
  return r * (1.0 - smooth_step(r - 1.0, virial_template_center(), kKappa));
}

}  // namespace

double smooth_step(double t, double center, double kappa) { return smooth_step_t(t, center, kappa); }

double psi_template(double r) { return 1.0 - smooth_step(2.0 * r - 1.0, 0.5, kKappa); }

double virial_template_center() {
  static const double a = solve_center();
  return a;
}

VirialTemplate virial_template(double r) {
  if (r < 0.0) throw DomainError("virial template needs r >= 0");
  if (r <= 1.0) return {0.5 * r * r, r, 1.0, 0.0, 0.0};
  if (r >= 2.0) return {1.0, 0.0, 0.0, 0.0, 0.0};
  const double a = virial_template_center();
  const auto x = ad::make_fvar<double, 3>(r);
  const auto d1 = x * (1.0 - smooth_step_t(x - 1.0, a, kKappa));
  VirialTemplate out{};
  out.f = 0.5 + gl_rule().integrate(template_d1, 1.0, r);
  out.d1 = d1.derivative(0);
  out.d2 = d1.derivative(1);
  out.d3 = d1.derivative(2);
  out.d4 = d1.derivative(3);
  return out;
}

VirialCutoffValues virial_cutoff(double r, double R, int dim) {
  if (!(R > 0.0)) throw DomainError("cutoff radius must be positive");
  const double rho = r / R;
  const double n1 = dim - 1.0;
  VirialCutoffValues v{};
  if (rho <= 1.0) {
    v.f = 0.5 * r * r;
    v.radial = r;
    v.second = 1.0;
    v.tangential = 1.0;
    v.laplacian = dim;
    v.bilaplacian = 0.0;
    return v;
  }
  const auto t = virial_template(rho);
  v.f = R * R * t.f;
  v.radial = R * t.d1;
  v.second = t.d2;
  v.tangential = t.d1 / rho;
  v.laplacian = t.d2 + n1 * t.d1 / rho;
  // h = f'' + (N-1) f'/rho; Delta^2 f = h'' + (N-1) h'/rho, rescaled by R^{-2}.
  const double h1 = t.d3 + n1 * (t.d2 / rho - t.d1 / (rho * rho));
  const double h2 = t.d4 + n1 * (t.d3 / rho - 2.0 * t.d2 / (rho * rho) + 2.0 * t.d1 / (rho * rho * rho));
  v.bilaplacian = (h2 + n1 * h1 / rho) / (R * R);
  return v;
}

Field psi_field(const Grid& grid, double R) {
  if (!(R > 0.0)) throw DomainError("cutoff radius must be positive");
  const auto r = grid.radius();
  Field out(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) out[n] = psi_template(r[n] / R);
  return out;
}

std::vector<PropertyCheck> check_cutoff(const Grid& grid, const CutoffSpec& spec, double tol) {
  const auto r = grid.radius();
  const double R = spec.radius;
  auto make = [tol](std::string name, double worst) { return PropertyCheck{std::move(name), worst, worst <= tol}; };
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  std::vector<PropertyCheck> out;
  if (spec.kind == CutoffKind::psi) {
    double plateau = lowest, outside = lowest, range = lowest;
    for (double x : r) {
      const double v = psi_template(x / R);
      if (x <= 0.5 * R) plateau = std::max(plateau, std::abs(v - 1.0));
      if (x >= R) outside = std::max(outside, std::abs(v));
      range = std::max({range, -v, v - 1.0});
    }
    out.push_back(make("psi_R = 1 on B(R/2)", plateau));
    out.push_back(make("psi_R = 0 for |x| >= R", outside));
    out.push_back(make("0 <= psi_R <= 1", range));
    return out;
  }
  double convex = lowest, curvature = lowest, slope = lowest, lap = lowest, inner = lowest, flat = lowest;
  for (double x : r) {
    const auto v = virial_cutoff(x, R, grid.dim());
    convex = std::max(convex, -v.second);
    curvature = std::max(curvature, v.second - 1.0);
    slope = std::max(slope, v.radial - x);
    lap = std::max(lap, v.laplacian - grid.dim());
    if (x <= R) inner = std::max(inner, std::abs(v.f - 0.5 * x * x));
    if (x >= 2.0 * R) flat = std::max(flat, std::abs(v.f - R * R) / (R * R));
  }
  out.push_back(make("f_R'' >= 0", convex));
  out.push_back(make("f_R'' <= 1", curvature));
  out.push_back(make("f_R'(r) <= r", slope));
  out.push_back(make("N - Delta f_R >= 0", lap));
  out.push_back(make("f_R = |x|^2/2 on B(R)", inner));
  out.push_back(make("f_R = R^2 for |x| >= 2R", flat));
  return out;
}

}  // namespace finls::diagnostics
