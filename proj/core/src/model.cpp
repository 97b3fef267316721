#include "finls/model.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "finls/error.hpp"
#include "finls/spectral.hpp"

namespace finls::model {

std::string to_string(Sign sign) { return sign == Sign::focusing ? "focusing" : "defocusing"; }

Sign sign_from_string(const std::string& name) {
  if (name == "focusing") return Sign::focusing;
  if (name == "defocusing") return Sign::defocusing;
  throw ValidationError("unknown sign '" + name + "' (expected focusing|defocusing)");
}

double mass_critical_power(int dim, double s, double b) { return 1.0 + 2.0 * (2.0 * s - b) / dim; }

double energy_critical_power(int dim, double s, double b) {
  return 1.0 + 2.0 * (2.0 * s - b) / (dim - 2.0 * s);
}

void validate(const ModelParams& params) {
  const int n = params.dim;
  std::ostringstream why;
  if (n != 2 && n != 3) {
    why << "dimension N=" << n << " must be 2 or 3";
    throw ValidationError(why.str());
  }
  const double s_lo = n / (2.0 * n - 1.0);
  if (!(params.s > s_lo && params.s < 1.0)) {
    why << "s=" << params.s << " violates N/(2N-1)=" << s_lo << " < s < 1";
    throw ValidationError(why.str());
  }
  if (!(params.b > 0.0 && params.b < 2.0 * params.s)) {
    why << "b=" << params.b << " violates 0 < b < 2s=" << 2.0 * params.s;
    throw ValidationError(why.str());
  }
  const double lo = mass_critical_power(n, params.s, params.b);
  const double hi = energy_critical_power(n, params.s, params.b);
  if (!(params.p > lo && params.p < hi)) {
    why << "p=" << params.p << " violates p_*=" << lo << " < p < p^*=" << hi;
    throw ValidationError(why.str());
  }
}

DerivedExponents derive_exponents(const ModelParams& params) {
  validate(params);
  const double n = params.dim;
  const double s = params.s;
  const double b = params.b;
  const double p = params.p;
  DerivedExponents e{};
  e.s_c = n / 2.0 - (2.0 * s - b) / (p - 1.0);
  e.gamma_c = (s - e.s_c) / e.s_c;
  e.B = (n * (p - 1.0) + 2.0 * b) / (2.0 * s);
  e.A = p + 1.0 - e.B;
  e.p_star = mass_critical_power(params.dim, s, b);
  e.p_upper = energy_critical_power(params.dim, s, b);
  return e;
}

bool scattering_hypotheses_hold(const ModelParams& params) {
  const double n = params.dim;
  if (params.dim < 3) return false;
  if (!(params.s > n / (n + 1.0))) return false;
  if (!(params.p > 2.0 * (1.0 - params.b / n))) return false;
  if (params.dim == 3 && !(params.p < (n - 2.0 * params.b) / (n - 2.0 * params.s))) return false;
  return true;
}

double cube_average_of_weight(int dim, double half_side, double b) {
  // Projecting the cube radially onto one of its 2N faces reduces the
  // singular volume integral to a smooth face integral:
  //   int_cube |x|^{-b} = 2N a / (N - b) * int_{face} (|y|^2 + a^2)^{-b/2} dy.
  const double a = half_side;
  constexpr std::size_t kNodes = 48;
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
      table(gsl_integration_glfixed_table_alloc(kNodes), &gsl_integration_glfixed_table_free);
  std::vector<double> x(kNodes), wts(kNodes);
  for (std::size_t i = 0; i < kNodes; ++i) {
    gsl_integration_glfixed_point(-a, a, i, &x[i], &wts[i], table.get());
  }
  double face = 0.0;
  if (dim == 2) {
    for (std::size_t i = 0; i < kNodes; ++i) face += wts[i] * std::pow(x[i] * x[i] + a * a, -b / 2.0);
  } else {
    for (std::size_t i = 0; i < kNodes; ++i) {
      for (std::size_t j = 0; j < kNodes; ++j) {
        face += wts[i] * wts[j] * std::pow(x[i] * x[i] + x[j] * x[j] + a * a, -b / 2.0);
      }
    }
  }
  const double integral = 2.0 * dim * a / (dim - b) * face;
  return integral / std::pow(2.0 * a, dim);
}

WeightField::WeightField(const Grid& grid, double b) : grid_(grid), b_(b), values_(grid.size()) {
  if (!(b >= 0.0 && b < grid.dim())) throw DomainError("weight exponent must lie in [0, N)");
  const auto r = grid.radius();
  for (std::size_t n = 0; n < grid.size(); ++n) values_[n] = r[n] > 0.0 ? std::pow(r[n], -b) : 0.0;
  values_[grid.origin_flat_index()] = cube_average_of_weight(grid.dim(), grid.spacing() / 2.0, b);
  max_off_origin_ = std::pow(grid.spacing(), -b);
}

double mass(const Field& u) { return spectral::l2_norm_squared(u); }

double potential(const Field& u, const WeightField& w, double p) {
  const Field phys = spectral::to_physical(u);
  const auto vals = phys.values();
  const auto& wv = w.values();
  double acc = 0.0;
  for (std::size_t n = 0; n < vals.size(); ++n) acc += wv[n] * std::pow(std::abs(vals[n]), p + 1.0);
  return acc * u.grid().cell_volume();
}

double kinetic(const Field& u, double s) {
  const double k = spectral::sobolev_seminorm(u, s);
  return k * k;
}

double energy(const Field& u, const ModelParams& params, const WeightField& w) {
  return kinetic(u, params.s) -
         params.sign_factor() * 2.0 / (params.p + 1.0) * potential(u, w, params.p);
}

double virial_functional(const Field& u, const ModelParams& params, const WeightField& w) {
  const auto e = derive_exponents(params);
  return kinetic(u, params.s) - e.B / (1.0 + params.p) * potential(u, w, params.p);
}

Functionals evaluate(const Field& u, const ModelParams& params, const WeightField& w) {
  const auto e = derive_exponents(params);
  Functionals f{};
  f.mass = mass(u);
  f.kinetic = kinetic(u, params.s);
  f.potential = potential(u, w, params.p);
  f.energy = f.kinetic - params.sign_factor() * 2.0 / (params.p + 1.0) * f.potential;
  f.virial = f.kinetic - e.B / (1.0 + params.p) * f.potential;
  return f;
}

MeMg me_mg(const Functionals& f, const ThresholdReference& ref, const DerivedExponents& exps) {
  if (!(ref.mass > 0.0) || !(ref.kinetic > 0.0)) {
    throw ConsistencyError("ground-state reference has zero mass or kinetic energy");
  }
  if (!(ref.energy > 0.0)) throw ConsistencyError("ground-state energy E[Q] must be positive");
  MeMg out{};
  out.me = std::pow(f.mass / ref.mass, exps.gamma_c) * (f.energy / ref.energy);
  out.mg = std::pow(std::sqrt(f.mass / ref.mass), exps.gamma_c) * std::sqrt(f.kinetic / ref.kinetic);
  return out;
}

MeMg me_mg(const Field& u, const ModelParams& params, const WeightField& w,
           const ThresholdReference& ref) {
  return me_mg(evaluate(u, params, w), ref, derive_exponents(params));
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::global_scattering:
      return "global_scattering_regime";
    case Regime::blowup:
      return "blowup_regime";
    case Regime::indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

ThresholdReport classify_threshold(const Field& u, const ModelParams& params, const WeightField& w,
                                   const ThresholdReference& ref) {
  const auto exps = derive_exponents(params);
  const auto f = evaluate(u, params, w);
  const auto r = me_mg(f, ref, exps);
  ThresholdReport rep{};
  rep.me = r.me;
  rep.mg = r.mg;
  rep.potential_mass = f.potential * std::pow(f.mass, exps.gamma_c);
  rep.potential_mass_threshold = ref.potential * std::pow(ref.mass, exps.gamma_c);
  rep.virial = f.virial;
  rep.scattering_hypotheses = scattering_hypotheses_hold(params);

  const auto below = [](double v) { return v < 1.0 - kThresholdBoundaryBand; };
  const auto above = [](double v) { return v > 1.0 + kThresholdBoundaryBand; };
  if (below(r.me) && below(r.mg)) {
    rep.regime = Regime::global_scattering;
  } else if (below(r.me) && above(r.mg)) {
    rep.regime = Regime::blowup;
  } else {
    rep.regime = Regime::indeterminate;
  }
  return rep;
}

}  // namespace finls::model
