#include "finls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "finls/error.hpp"

namespace finls::spectral {

namespace {

void require_finite(cplx v) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw DomainError("multiplier symbol is not finite at a lattice point");
  }
}

double power_or_one(double x, double sigma) {
  if (sigma == 0.0) return 1.0;
  if (x == 0.0) return 0.0;
  return std::pow(x, sigma);
}

// Frequency-space quadrature weight: h^N / M^N per coefficient.
double parseval_weight(const Grid& g) {
  return g.cell_volume() / static_cast<double>(g.size());
}

}  // namespace

Multiplier::Multiplier(const Grid& grid, const Symbol& symbol)
    : grid_(grid), values_(grid.size()) {
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto k = grid.wavevector(n);
    const cplx v = symbol(std::span<const double>(k.data(), static_cast<std::size_t>(grid.dim())));
    require_finite(v);
    values_[n] = v;
  }
}

Multiplier::Multiplier(const Grid& grid, const RadialSymbol& symbol)
    : grid_(grid), values_(grid.size()) {
  const auto k2 = grid.xi_squared();
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const cplx v = symbol(std::sqrt(k2[n]));
    require_finite(v);
    values_[n] = v;
  }
}

Multiplier::Multiplier(Grid grid, ComplexBuffer values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ContractViolation("multiplier size mismatch");
  for (const auto& v : values_) require_finite(v);
}

Field forward_transform(const Field& f) {
  if (!f.is_physical()) {
    throw ContractViolation("forward_transform expects a physical-representation field");
  }
  Field out = f;
  detail::fft_forward_inplace(out.grid(), out.buffer());
  out.set_representation(Representation::frequency);
  return out;
}

Field inverse_transform(const Field& f) {
  if (f.is_physical()) {
    throw ContractViolation("inverse_transform expects a frequency-representation field");
  }
  Field out = f;
  detail::fft_inverse_inplace(out.grid(), out.buffer());
  out.set_representation(Representation::physical);
  return out;
}

Field to_physical(Field f) {
  if (f.is_physical()) return f;
  detail::fft_inverse_inplace(f.grid(), f.buffer());
  f.set_representation(Representation::physical);
  return f;
}

Field to_frequency(Field f) {
  if (!f.is_physical()) return f;
  detail::fft_forward_inplace(f.grid(), f.buffer());
  f.set_representation(Representation::frequency);
  return f;
}

Field apply_multiplier(const Field& f, const Multiplier& multiplier) {
  if (!(f.grid() == multiplier.grid())) throw ContractViolation("multiplier grid mismatch");
  const bool physical = f.is_physical();
  Field out = to_frequency(f);
  const auto sym = multiplier.values();
  auto vals = out.values();
  for (std::size_t n = 0; n < vals.size(); ++n) vals[n] *= sym[n];
  return physical ? to_physical(std::move(out)) : out;
}

Field apply_multiplier(const Field& f, const Symbol& symbol) {
  return apply_multiplier(f, Multiplier(f.grid(), symbol));
}

Field apply_radial_multiplier(const Field& f, const RadialSymbol& symbol) {
  const bool physical = f.is_physical();
  Field out = to_frequency(f);
  const auto k2 = f.grid().xi_squared();
  auto vals = out.values();
  for (std::size_t n = 0; n < vals.size(); ++n) {
    const double v = symbol(std::sqrt(k2[n]));
    if (!std::isfinite(v)) throw DomainError("multiplier symbol is not finite at a lattice point");
    vals[n] *= v;
  }
  return physical ? to_physical(std::move(out)) : out;
}

Field frac_laplacian(const Field& f, double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("fractional order must be >= 0, got " + std::to_string(sigma));
  if (sigma == 0.0) return f;
  return apply_radial_multiplier(f, [sigma](double k) { return power_or_one(k, sigma); });
}

Field free_propagator(const Field& f, double t, double s) {
  const bool physical = f.is_physical();
  Field out = to_frequency(f);
  const auto k2 = f.grid().xi_squared();
  auto vals = out.values();
  for (std::size_t n = 0; n < vals.size(); ++n) {
    const double phase = -t * power_or_one(k2[n], s);
    vals[n] *= cplx(std::cos(phase), std::sin(phase));
  }
  return physical ? to_physical(std::move(out)) : out;
}

double resolvent_constant(double s) {
  return std::sqrt(std::sin(std::numbers::pi * s) / std::numbers::pi);
}

Field resolvent(const Field& f, double m, double s) {
  if (!(m > 0.0)) throw DomainError("resolvent mass parameter must be > 0");
  const double cs = resolvent_constant(s);
  const bool physical = f.is_physical();
  Field out = to_frequency(f);
  const auto k2 = f.grid().xi_squared();
  auto vals = out.values();
  for (std::size_t n = 0; n < vals.size(); ++n) vals[n] *= cs / (m + k2[n]);
  return physical ? to_physical(std::move(out)) : out;
}

Field gradient_component(const Field& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.dim()) throw ContractViolation("gradient axis out of range");
  const bool physical = f.is_physical();
  Field out = to_frequency(f);
  auto vals = out.values();
  for (std::size_t n = 0; n < vals.size(); ++n) {
    const int i = g.unravel(n)[axis];
    vals[n] *= g.is_nyquist(i) ? cplx(0.0) : cplx(0.0, g.frequency(i));
  }
  return physical ? to_physical(std::move(out)) : out;
}

std::vector<Field> gradient(const Field& f) {
  const Field hat = to_frequency(f);
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(f.grid().dim()));
  for (int a = 0; a < f.grid().dim(); ++a) {
    Field d = gradient_component(hat, a);
    out.push_back(f.is_physical() ? to_physical(std::move(d)) : std::move(d));
  }
  return out;
}

void dealias_two_thirds(Field& f) {
  if (f.is_physical()) throw ContractViolation("dealias_two_thirds expects a spectral field");
  const Grid& g = f.grid();
  const int cutoff = g.points_per_axis() / 3;
  auto vals = f.values();
  for (std::size_t n = 0; n < vals.size(); ++n) {
    const auto idx = g.unravel(n);
    for (int a = 0; a < g.dim(); ++a) {
      if (std::abs(g.mode_number(idx[a])) > cutoff) {
        vals[n] = 0.0;
        break;
      }
    }
  }
}

cplx inner(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw ContractViolation("inner product across grids");
  if (a.representation() != b.representation()) {
    throw ContractViolation("inner product across representations");
  }
  cplx acc{0.0, 0.0};
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t n = 0; n < va.size(); ++n) acc += std::conj(va[n]) * vb[n];
  const double w = a.is_physical() ? a.grid().cell_volume() : parseval_weight(a.grid());
  return acc * w;
}

double l2_norm_squared(const Field& f) {
  double acc = 0.0;
  for (const auto& v : f.values()) acc += std::norm(v);
  return acc * (f.is_physical() ? f.grid().cell_volume() : parseval_weight(f.grid()));
}

double l2_norm(const Field& f) { return std::sqrt(l2_norm_squared(f)); }

double sobolev_seminorm(const Field& f, double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("Sobolev order must be >= 0");
  if (sigma == 0.0) return l2_norm(f);
  const Field hat = to_frequency(f);
  const auto k2 = f.grid().xi_squared();
  const auto vals = hat.values();
  double acc = 0.0;
  for (std::size_t n = 0; n < vals.size(); ++n) acc += power_or_one(k2[n], sigma) * std::norm(vals[n]);
  return std::sqrt(acc * parseval_weight(f.grid()));
}

double sobolev_norm(const Field& f, double sigma) {
  const Field hat = to_frequency(f);
  const auto k2 = f.grid().xi_squared();
  const auto vals = hat.values();
  double acc = 0.0;
  for (std::size_t n = 0; n < vals.size(); ++n) acc += std::pow(1.0 + k2[n], sigma) * std::norm(vals[n]);
  return std::sqrt(acc * parseval_weight(f.grid()));
}

double sup_norm(const Field& f) {
  const Field u = to_physical(f);
  double m = 0.0;
  for (const auto& v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

double lp_norm(const Field& f, double r) {
  if (std::isinf(r)) return sup_norm(f);
  if (!(r >= 1.0)) throw DomainError("Lebesgue exponent must be >= 1");
  const Field u = to_physical(f);
  double acc = 0.0;
  for (const auto& v : u.values()) acc += std::pow(std::abs(v), r);
  return std::pow(acc * f.grid().cell_volume(), 1.0 / r);
}

}  // namespace finls::spectral
