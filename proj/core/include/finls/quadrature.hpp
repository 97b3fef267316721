#pragma once

#include <vector>

#include "finls/grid.hpp"

namespace finls::diagnostics {

struct MQuadratureSpec {
  int nodes = 128;
  /// Half-width of the log-interval; 0 selects it from the grid spectrum.
  double y_max = 0.0;
  /// Relative size of the neglected tails above which evaluation fails.
  double tail_tolerance = 1e-4;
};

/// Gauss-Legendre rule for int_0^inf g(m) dm after m = e^y, y in [-y_max, y_max].
///
/// The upper tail is closed analytically from the large-m expansion
/// m^s |xi|^2 / (m + |xi|^2)^2 ~ m^{s-2} |xi|^2; the lower tail is dropped.
struct MQuadrature {
  double s = 0.5;
  double y_max = 0.0;
  std::vector<double> m;        // nodes
  std::vector<double> weights;  // GL weight times the Jacobian e^y
  /// c_s^2 m_hi^{s-1} / (1 - s): multiplies ||grad u||^2 to give the upper tail.
  double upper_tail_factor = 0.0;
  double tail_tolerance = 1e-4;

  double m_lo() const;
  double m_hi() const;
};

/// Smallest y-offsets (above ln|xi|_max^2, below ln|xi|_min^2) at which the
/// single-mode tail after correction is below rel_tol of the full integral.
double upper_offset(double s, double rel_tol = 1e-6);
double lower_offset(double s, double rel_tol = 1e-6);

MQuadrature make_m_quadrature(const spectral::Grid& grid, double s, const MQuadratureSpec& spec = {});

}  // namespace finls::diagnostics
