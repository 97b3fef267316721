#pragma once

#include <string>
#include <vector>

#include "finls/field.hpp"

namespace finls::diagnostics {

using spectral::Field;
using spectral::Grid;

enum class CutoffKind { psi, f_virial };

struct CutoffSpec {
  double radius = 1.0;
  CutoffKind kind = CutoffKind::f_virial;
};

/// C-infinity step on [0, 1]: 0 for t <= 0, 1 for t >= 1,
/// (1 + tanh(kappa (t - center) / (t (1 - t)))) / 2 in between.
double smooth_step(double t, double center, double kappa = 1.0);

/// Unit bump: 1 on [0, 1/2], 0 on [1, inf), 1 - smooth_step(2r - 1, 1/2) between.
double psi_template(double r);

/// Unit virial weight f and its first four derivatives at r >= 0.
///
/// f = r^2/2 on [0, 1]. On [1, 2], f'(r) = r (1 - smooth_step(r - 1, a)) with
/// a chosen so that f(2) = 1, after which f is constant.
struct VirialTemplate {
  double f;
  double d1;
  double d2;
  double d3;
  double d4;
};
VirialTemplate virial_template(double r);
/// The step centre a used by virial_template.
double virial_template_center();

/// Radial data of f_R(x) = R^2 f(|x| / R) at |x| = r.
struct VirialCutoffValues {
  double f;            // f_R
  double radial;       // f_R'(r) = R f'(r/R)
  double second;       // f_R''(r) = f''(r/R)
  double tangential;   // f_R'(r) / r, the Hessian eigenvalue across x
  double laplacian;    // Delta f_R
  double bilaplacian;  // Delta^2 f_R
};
VirialCutoffValues virial_cutoff(double r, double R, int dim);

/// psi_R(x) = psi(|x| / R) sampled on the grid.
Field psi_field(const Grid& grid, double R);

struct PropertyCheck {
  std::string name;
  double worst;  // largest violation (<= 0 when the property holds)
  bool pass;
};

/// Pointwise support, range and sign properties of a cutoff at every grid point.
std::vector<PropertyCheck> check_cutoff(const Grid& grid, const CutoffSpec& spec, double tol = 1e-12);

}  // namespace finls::diagnostics
