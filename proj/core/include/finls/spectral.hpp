#pragma once

#include <functional>
#include <span>
#include <vector>

#include "finls/field.hpp"

namespace finls::spectral {

/// Fourier symbol evaluated at a lattice wavevector (components xi[0..dim)).
using Symbol = std::function<cplx(std::span<const double> xi)>;
/// Symbol depending on |xi| only.
using RadialSymbol = std::function<double(double abs_xi)>;

/// Precomputed symbol values on every lattice point, in FFT order.
class Multiplier {
 public:
  Multiplier(const Grid& grid, const Symbol& symbol);
  Multiplier(const Grid& grid, const RadialSymbol& symbol);
  Multiplier(Grid grid, ComplexBuffer values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }

 private:
  Grid grid_;
  ComplexBuffer values_;
};

Field forward_transform(const Field& f);
Field inverse_transform(const Field& f);
/// Returns f in physical representation, transforming if needed.
Field to_physical(Field f);
Field to_frequency(Field f);

/// F^{-1}(symbol * F(f)); the result keeps the representation of f.
Field apply_multiplier(const Field& f, const Symbol& symbol);
Field apply_multiplier(const Field& f, const Multiplier& multiplier);
Field apply_radial_multiplier(const Field& f, const RadialSymbol& symbol);

/// D^sigma, symbol |xi|^sigma with the zero mode mapped to zero.
Field frac_laplacian(const Field& f, double sigma);

/// exp(-i t |xi|^{2s}); unitary on the discrete L2 product.
Field free_propagator(const Field& f, double t, double s);

/// c_s (m - Delta)^{-1} f with c_s = sqrt(sin(pi s) / pi).
Field resolvent(const Field& f, double m, double s);
double resolvent_constant(double s);

/// Spectral partial derivative along one axis. The Nyquist mode is dropped
/// so real fields stay real.
Field gradient_component(const Field& f, int axis);
std::vector<Field> gradient(const Field& f);

/// Zeros every mode with |k_a| > M/3 on some axis (2/3 rule). f must be in
/// frequency representation.
void dealias_two_thirds(Field& f);

/// Discrete L2 product h^N sum conj(a) b (either representation, via Parseval
/// when both are spectral).
cplx inner(const Field& a, const Field& b);
double l2_norm_squared(const Field& f);
double l2_norm(const Field& f);

/// ||D^sigma f||_{L2}.
double sobolev_seminorm(const Field& f, double sigma);
/// ||(1 + |xi|^2)^{sigma/2} f||_{L2}.
double sobolev_norm(const Field& f, double sigma);

/// ||f||_{L^r} by Riemann sum; r = infinity gives the max modulus.
double lp_norm(const Field& f, double r);
double sup_norm(const Field& f);

}  // namespace finls::spectral
