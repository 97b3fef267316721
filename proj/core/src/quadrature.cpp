#include "finls/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "finls/error.hpp"
#include "finls/spectral.hpp"

namespace finls::diagnostics {

namespace {

// int_0^inf m^s k^2/(m+k^2)^2 dm = C k^{2s}.
double single_mode_constant(double s) { return M_PI * s / std::sin(M_PI * s); }

}  // namespace

double MQuadrature::m_lo() const { return std::exp(-y_max); }
double MQuadrature::m_hi() const { return std::exp(y_max); }

double upper_offset(double s, double rel_tol) {
  // Residual after the m^{s-2} correction: 2 k^4 m_hi^{s-2} / (2 - s).
  return std::log(2.0 / ((2.0 - s) * single_mode_constant(s) * rel_tol)) / (2.0 - s);
}

double lower_offset(double s, double rel_tol) {
  // Dropped piece: m_lo^{1+s} / ((1 + s) k^2).
  return std::log(1.0 / ((1.0 + s) * single_mode_constant(s) * rel_tol)) / (1.0 + s);
}

MQuadrature make_m_quadrature(const spectral::Grid& grid, double s, const MQuadratureSpec& spec) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("m-quadrature needs 0 < s < 1");
  if (spec.nodes < 2) throw DomainError("m-quadrature needs at least two nodes");
  MQuadrature q;
  q.s = s;
  q.tail_tolerance = spec.tail_tolerance;
  if (spec.y_max > 0.0) {
    q.y_max = spec.y_max;
  } else {
    const double kmax2 = std::pow(grid.max_frequency(), 2);
    const double kmin2 = std::pow(grid.min_frequency(), 2);
    const double hi = std::log(kmax2) + upper_offset(s);
    const double lo = std::log(kmin2) - lower_offset(s);
    q.y_max = std::max(hi, -lo);
  }

  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
      table(gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(spec.nodes)),
            &gsl_integration_glfixed_table_free);
  if (!table) throw QuadratureError("failed to allocate Gauss-Legendre table");
  q.m.resize(spec.nodes);
  q.weights.resize(spec.nodes);
  for (int i = 0; i < spec.nodes; ++i) {
    double y = 0.0;
    double w = 0.0;
    gsl_integration_glfixed_point(-q.y_max, q.y_max, static_cast<std::size_t>(i), &y, &w, table.get());
    q.m[i] = std::exp(y);
    q.weights[i] = w * q.m[i];
  }
  const double cs = spectral::resolvent_constant(s);
  q.upper_tail_factor = cs * cs * std::pow(q.m_hi(), s - 1.0) / (1.0 - s);
  return q;
}

}  // namespace finls::diagnostics
